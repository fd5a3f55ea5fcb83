#include "tcilab/heat.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tci {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPiSq = kPi * kPi;

void check_unit_interval(double x, const char* who) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument(std::string(who) + ": point " +
                                std::to_string(x) + " outside [0,1]");
}

}  // namespace

double HeatKernelExpansion::eval(double t, double x, double y, double tol) const {
  if (!(t > 0.0))
    throw std::invalid_argument("heat kernel: t must be positive");
  if (!(tol > 0.0))
    throw std::invalid_argument("heat kernel: tolerance must be positive");
  check_unit_interval(x, "heat kernel");
  check_unit_interval(y, "heat kernel");

  // Smallest M with 2 exp(-M^2 pi^2 t / 2) <= tol.
  const double need = 2.0 * std::log(2.0 / tol) / (kPiSq * t);
  const int modes = std::max(1, static_cast<int>(std::ceil(std::sqrt(std::max(0.0, need)))));
  if (modes > max_modes)
    throw std::invalid_argument("heat kernel: tolerance " + std::to_string(tol) +
                                " at t = " + std::to_string(t) + " needs " +
                                std::to_string(modes) + " modes, more than the configured " +
                                std::to_string(max_modes));
  double s = 0.0;
  for (int k = modes; k >= 1; --k) {
    const double kk = static_cast<double>(k);
    s += std::sin(kk * kPi * x) * std::sin(kk * kPi * y) *
         std::exp(-kk * kk * kPiSq * t / 2.0);
  }
  return 2.0 * s;
}

double kernel_eval(double t, double x, double y, double tol) {
  return HeatKernelExpansion{}.eval(t, x, y, tol);
}

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 3)
    throw std::invalid_argument("grid function needs at least 3 nodes");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("grid function value not finite");
  values_.front() = 0.0;  // Dirichlet boundary
  values_.back() = 0.0;
}

GridFunction GridFunction::zeros(std::size_t intervals) {
  if (intervals < 2)
    throw std::invalid_argument("grid function needs at least 2 intervals");
  return GridFunction(std::vector<double>(intervals + 1, 0.0));
}

GridFunction GridFunction::sample(std::size_t intervals,
                                  const std::function<double(double)>& f) {
  if (intervals < 2)
    throw std::invalid_argument("grid function needs at least 2 intervals");
  std::vector<double> v(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j)
    v[j] = f(static_cast<double>(j) / static_cast<double>(intervals));
  return GridFunction(std::move(v));
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::sup_distance(const GridFunction& other) const {
  if (other.values_.size() != values_.size())
    throw std::invalid_argument("sup_distance: grid size mismatch");
  double m = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j)
    m = std::max(m, std::abs(values_[j] - other.values_[j]));
  return m;
}

GridFunction semigroup_apply(const GridFunction& f, double t) {
  if (!(t > 0.0))
    throw std::invalid_argument("semigroup_apply: t must be positive");
  const std::size_t J = f.intervals();
  // DST-I of the interior values: f_j = sum_k a_k sin(k pi j / J).
  std::vector<double> a(J, 0.0);  // a[k], k = 1..J-1
  for (std::size_t k = 1; k < J; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j < J; ++j)
      s += f[j] * std::sin(kPi * static_cast<double>(k) * static_cast<double>(j) /
                           static_cast<double>(J));
    a[k] = 2.0 * s / static_cast<double>(J);
  }
  std::vector<double> out(J + 1, 0.0);
  for (std::size_t j = 1; j < J; ++j) {
    double s = 0.0;
    for (std::size_t k = 1; k < J; ++k) {
      const double kk = static_cast<double>(k);
      s += a[k] * std::exp(-kk * kk * kPiSq * t / 2.0) *
           std::sin(kPi * kk * static_cast<double>(j) / static_cast<double>(J));
    }
    out[j] = s;
  }
  return GridFunction(std::move(out));
}

double kernel_l2_time_integral(double t, double x) {
  if (!(t > 0.0))
    throw std::invalid_argument("kernel_l2_time_integral: t must be positive");
  check_unit_interval(x, "kernel_l2_time_integral");

  // Series value 2 sum_k sin^2(k pi x) (1 - e^{-k^2 pi^2 t})/(k^2 pi^2).
  // Split off the t-independent part, which sums in closed form to x(1-x)
  // (Fourier sine series of the Green function diagonal); the remainder
  // decays like e^{-k^2 pi^2 t} and is truncated once its tail bound
  // 2 e^{-M^2 pi^2 t} / (pi^2 M) drops below 1e-15.
  const double head = x * (1.0 - x);
  double tail = 0.0;
  for (int k = 1; k <= 100000; ++k) {
    const double kk = static_cast<double>(k);
    const double decay = std::exp(-kk * kk * kPiSq * t);
    const double sk = std::sin(kk * kPi * x);
    tail += 2.0 * sk * sk * decay / (kk * kk * kPiSq);
    if (2.0 * decay / (kPiSq * kk) < 1e-15) break;
  }
  const double value = head - tail;

  const double bound = std::sqrt(2.0 * t / kPi);
  if (value > bound + 1e-9)
    throw std::logic_error("kernel_l2_time_integral: value " +
                           std::to_string(value) + " exceeds bound " +
                           std::to_string(bound) + " at t = " + std::to_string(t) +
                           ", x = " + std::to_string(x));
  return value;
}

}  // namespace tci
