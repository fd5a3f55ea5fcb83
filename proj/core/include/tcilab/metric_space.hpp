#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tci {

/// A finite metric space given by point labels and a dense distance matrix.
/// The constructor validates symmetry, zero diagonal, positivity off the
/// diagonal, and the triangle inequality over every triple, so downstream
/// code may assume a genuine metric. Intended for desk-scale spaces (the
/// exhaustive triple check is cubic in the point count).
class FiniteMetricSpace {
public:
  FiniteMetricSpace(std::vector<std::string> labels,
                    std::vector<std::vector<double>> dist);

  std::size_t size() const { return n_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  double dist(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  double max_dist() const { return max_dist_; }

private:
  std::size_t n_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> dist_;  // row-major n x n
  double max_dist_ = 0.0;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

SpacePtr make_space(std::vector<std::string> labels,
                    std::vector<std::vector<double>> dist);

/// Points on a line with the absolute-value metric; a convenient valid metric
/// for tests and small examples. Coordinates must be strictly increasing.
SpacePtr line_space(std::vector<std::string> labels,
                    const std::vector<double>& coords);

/// A probability measure on a FiniteMetricSpace: nonnegative weights summing
/// to one (within 1e-12, validated at construction).
class DiscreteMeasure {
public:
  DiscreteMeasure(SpacePtr space, std::vector<double> weights);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  /// Integral of a function given by its values on the points.
  double expectation(std::span<const double> values) const;

private:
  SpacePtr space_;
  std::vector<double> weights_;
};

/// Relative entropy H(nu|mu) = sum nu_i log(nu_i / mu_i), with the 0*log 0 = 0
/// convention. Returns +infinity when nu is not absolutely continuous with
/// respect to mu. Result is clamped to be nonnegative.
double relative_entropy(const DiscreteMeasure& nu, const DiscreteMeasure& mu);

/// Empirical measure of a sample of point indices. The sample must be
/// nonempty and indices must lie inside the space.
DiscreteMeasure empirical_measure(std::span<const std::size_t> sample,
                                  SpacePtr space);

/// Exponential tilt: weights proportional to mu_i * exp(beta * potential_i),
/// renormalized. Always absolutely continuous with respect to mu.
DiscreteMeasure tilt_measure(const DiscreteMeasure& mu,
                             std::span<const double> potential, double beta);

/// Product of identical factors under the max metric:
/// d((x_0..x_k),(y_0..y_k)) = max_i d_base(x_i, y_i).
/// Tuples are indexed row-major (last coordinate fastest). The product size
/// is capped at 100000 points. Labels are factor labels joined with '|'.
SpacePtr product_metric_max(const std::vector<SpacePtr>& factors);
SpacePtr product_metric_max(const SpacePtr& base, std::size_t copies);

}  // namespace tci
