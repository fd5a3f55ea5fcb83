#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tci {

/// Dirichlet heat kernel on [0,1] for the generator (1/2) d^2/dx^2:
///   p_t(x,y) = 2 sum_{k>=1} sin(k pi x) sin(k pi y) exp(-k^2 pi^2 t / 2).
/// Evaluation truncates the series at the first mode M whose term bound
/// 2 exp(-M^2 pi^2 t / 2) falls below the requested tolerance; if that M
/// exceeds max_modes the call fails rather than silently losing accuracy.
struct HeatKernelExpansion {
  int max_modes = 20000;

  double eval(double t, double x, double y, double tol = 1e-12) const;
};

/// Convenience evaluation with a default expansion.
double kernel_eval(double t, double x, double y, double tol = 1e-12);

/// A function sampled on the uniform grid x_j = j/J, j = 0..J, with Dirichlet
/// boundary: the endpoint values are forced to zero at construction.
class GridFunction {
public:
  explicit GridFunction(std::vector<double> values);
  static GridFunction zeros(std::size_t intervals);
  static GridFunction sample(std::size_t intervals,
                             const std::function<double(double)>& f);

  std::size_t intervals() const { return values_.size() - 1; }  // J
  std::size_t nodes() const { return values_.size(); }          // J + 1
  double operator[](std::size_t j) const { return values_[j]; }
  const std::vector<double>& values() const { return values_; }
  double node_x(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(intervals());
  }

  double sup_norm() const;
  double sup_distance(const GridFunction& other) const;

private:
  std::vector<double> values_;
};

/// Spectral action of the heat semigroup on a grid function: discrete sine
/// transform, decay of mode k by exp(-k^2 pi^2 t / 2), resynthesis. Requires
/// t > 0.
GridFunction semigroup_apply(const GridFunction& f, double t);

/// Time-integrated squared L2 norm of the kernel,
///   int_0^t int_0^1 p_{t-s}(x,y)^2 dy ds
///     = 2 sum_k sin^2(k pi x) (1 - exp(-k^2 pi^2 t)) / (k^2 pi^2),
/// evaluated through the closed form x(1-x) - 2 sum_k sin^2(k pi x)
/// exp(-k^2 pi^2 t) / (k^2 pi^2) (same series, exponentially convergent
/// remainder). The result is checked against the bound sqrt(2t/pi) + 1e-9
/// before returning.
double kernel_l2_time_integral(double t, double x);

}  // namespace tci
