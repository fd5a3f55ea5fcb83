#include "tcilab/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tci {

namespace {

std::string point_name(const FiniteMetricSpace& s, std::size_t i) {
  return "'" + s.label(i) + "' (index " + std::to_string(i) + ")";
}

}  // namespace

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels,
                                     std::vector<std::vector<double>> dist)
    : n_(labels.size()), labels_(std::move(labels)) {
  if (n_ == 0) throw std::invalid_argument("metric space must be nonempty");
  if (dist.size() != n_)
    throw std::invalid_argument("distance matrix must be square of size " +
                                std::to_string(n_));
  dist_.resize(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (dist[i].size() != n_)
      throw std::invalid_argument("distance matrix row " + std::to_string(i) +
                                  " has wrong length");
    for (std::size_t j = 0; j < n_; ++j) {
      const double d = dist[i][j];
      if (!std::isfinite(d)) throw std::invalid_argument("distance not finite");
      dist_[i * n_ + j] = d;
      max_dist_ = std::max(max_dist_, d);
    }
  }
  const double tol = 1e-12 * (1.0 + max_dist_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (dist_[i * n_ + i] != 0.0)
      throw std::invalid_argument("nonzero diagonal at " + point_name(*this, i));
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double dij = dist_[i * n_ + j];
      if (std::abs(dij - dist_[j * n_ + i]) > tol)
        throw std::invalid_argument("distance matrix not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      if (dij <= 0.0)
        throw std::invalid_argument("non-positive distance between distinct points " +
                                    point_name(*this, i) + " and " + point_name(*this, j));
    }
  }
  // Exhaustive triangle-inequality check. Cubic, so constructions should stay
  // at desk scale (a few hundred points).
  for (std::size_t i = 0; i < n_; ++i) {
    const double* di = dist_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) {
      const double dij = di[j];
      const double* dj = dist_.data() + j * n_;
      for (std::size_t k = 0; k < n_; ++k) {
        if (di[k] > dij + dj[k] + tol)
          throw std::invalid_argument(
              "triangle inequality violated for (" + std::to_string(i) + "," +
              std::to_string(j) + "," + std::to_string(k) + ")");
      }
    }
  }
}

SpacePtr make_space(std::vector<std::string> labels,
                    std::vector<std::vector<double>> dist) {
  return std::make_shared<FiniteMetricSpace>(std::move(labels), std::move(dist));
}

SpacePtr line_space(std::vector<std::string> labels,
                    const std::vector<double>& coords) {
  if (labels.size() != coords.size())
    throw std::invalid_argument("line_space: labels/coords size mismatch");
  for (std::size_t i = 1; i < coords.size(); ++i)
    if (!(coords[i] > coords[i - 1]))
      throw std::invalid_argument("line_space: coordinates must be strictly increasing");
  const std::size_t n = coords.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = std::abs(coords[i] - coords[j]);
  return make_space(std::move(labels), std::move(dist));
}

DiscreteMeasure::DiscreteMeasure(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) throw std::invalid_argument("measure needs a space");
  if (weights_.size() != space_->size())
    throw std::invalid_argument("measure has " + std::to_string(weights_.size()) +
                                " weights on a space of size " +
                                std::to_string(space_->size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("negative or non-finite weight at index " +
                                  std::to_string(i));
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("weights sum to " + std::to_string(sum) +
                                ", expected 1 within 1e-12");
}

double DiscreteMeasure::expectation(std::span<const double> values) const {
  if (values.size() != weights_.size())
    throw std::invalid_argument("expectation: value vector has wrong length");
  double s = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * values[i];
  return s;
}

double relative_entropy(const DiscreteMeasure& nu, const DiscreteMeasure& mu) {
  if (nu.size() != mu.size())
    throw std::invalid_argument("relative_entropy: measures live on spaces of different size");
  double h = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const double p = nu.weight(i);
    if (p == 0.0) continue;  // 0 * log 0 = 0
    const double q = mu.weight(i);
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    h += p * std::log(p / q);
  }
  return std::max(0.0, h);
}

DiscreteMeasure empirical_measure(std::span<const std::size_t> sample,
                                  SpacePtr space) {
  if (!space) throw std::invalid_argument("empirical_measure: null space");
  if (sample.empty())
    throw std::invalid_argument("empirical_measure: empty sample");
  std::vector<double> w(space->size(), 0.0);
  const double unit = 1.0 / static_cast<double>(sample.size());
  for (std::size_t idx : sample) {
    if (idx >= space->size())
      throw std::invalid_argument("empirical_measure: sample index " +
                                  std::to_string(idx) + " out of range");
    w[idx] += unit;
  }
  return DiscreteMeasure(std::move(space), std::move(w));
}

DiscreteMeasure tilt_measure(const DiscreteMeasure& mu,
                             std::span<const double> potential, double beta) {
  if (potential.size() != mu.size())
    throw std::invalid_argument("tilt_measure: potential has wrong length");
  for (double v : potential)
    if (!std::isfinite(v))
      throw std::invalid_argument("tilt_measure: potential not finite");
  // Shift by the max exponent over the support to keep exp() in range.
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0.0) shift = std::max(shift, beta * potential[i]);
  std::vector<double> w(mu.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) == 0.0) continue;
    w[i] = mu.weight(i) * std::exp(beta * potential[i] - shift);
    z += w[i];
  }
  if (!(z > 0.0) || !std::isfinite(z))
    throw std::runtime_error("tilt_measure: degenerate normalization");
  for (double& x : w) x /= z;
  return DiscreteMeasure(mu.space(), std::move(w));
}

namespace {

constexpr std::size_t kMaxProductPoints = 100000;

SpacePtr build_product(const SpacePtr& base, std::size_t copies) {
  const std::size_t s = base->size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < copies; ++k) {
    if (total > kMaxProductPoints / s + 1) total = kMaxProductPoints + 1;
    else total *= s;
    if (total > kMaxProductPoints)
      throw std::invalid_argument(
          "product space would exceed 100000 points (" + std::to_string(s) +
          "^" + std::to_string(copies) + ")");
  }

  std::vector<std::string> labels(total);
  std::vector<std::vector<std::size_t>> tuples(total, std::vector<std::size_t>(copies));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t k = copies; k-- > 0;) {
      tuples[idx][k] = rest % s;
      rest /= s;
    }
    std::string& lab = labels[idx];
    for (std::size_t k = 0; k < copies; ++k) {
      if (k) lab += '|';
      lab += base->label(tuples[idx][k]);
    }
  }

  std::vector<std::vector<double>> dist(total, std::vector<double>(total, 0.0));
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j < total; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < copies; ++k)
        d = std::max(d, base->dist(tuples[i][k], tuples[j][k]));
      dist[i][j] = d;
      dist[j][i] = d;
    }
  }
  return make_space(std::move(labels), std::move(dist));
}

}  // namespace

SpacePtr product_metric_max(const std::vector<SpacePtr>& factors) {
  if (factors.empty())
    throw std::invalid_argument("product_metric_max: empty factor list");
  for (const auto& f : factors)
    if (f != factors.front())
      throw std::invalid_argument("product_metric_max: all factors must be the same base space");
  return build_product(factors.front(), factors.size());
}

SpacePtr product_metric_max(const SpacePtr& base, std::size_t copies) {
  if (!base) throw std::invalid_argument("product_metric_max: null base");
  if (copies == 0)
    throw std::invalid_argument("product_metric_max: empty factor list");
  return build_product(base, copies);
}

}  // namespace tci
