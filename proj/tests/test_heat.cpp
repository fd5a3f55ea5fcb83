#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tcilab/heat.hpp"

using namespace tci;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("kernel symmetry, positivity, and boundary behavior") {
  for (double t : {0.01, 0.1, 0.5}) {
    for (double x : {0.2, 0.5, 0.9}) {
      for (double y : {0.1, 0.4, 0.8}) {
        const double pxy = kernel_eval(t, x, y);
        CHECK(pxy == kernel_eval(t, y, x));
        CHECK(pxy >= -1e-12);
      }
      // sin(k pi y) vanishes identically at the boundary.
      CHECK(kernel_eval(t, x, 0.0) == 0.0);
      CHECK(kernel_eval(t, x, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel mass is below one and integrates towards one for small t") {
  // int_0^1 p_t(x, y) dy < 1 (killing at the boundary) and -> 1 as t -> 0
  // for interior x.
  const double mass_small = oracle::simpson(
      [](double y) { return kernel_eval(0.001, 0.5, y); }, 0.0, 1.0, 2049);
  CHECK(mass_small <= 1.0 + 1e-9);
  CHECK(mass_small >= 0.999);
  const double mass_large = oracle::simpson(
      [](double y) { return kernel_eval(0.5, 0.5, y); }, 0.0, 1.0, 2049);
  CHECK(mass_large < 0.5);
}

TEST_CASE("Chapman-Kolmogorov via quadrature") {
  const double s = 0.1, t = 0.2;
  for (double x : {0.3, 0.5}) {
    for (double z : {0.5, 0.7}) {
      const double direct = kernel_eval(s + t, x, z);
      const double composed = oracle::simpson(
          [&](double y) { return kernel_eval(s, x, y) * kernel_eval(t, y, z); },
          0.0, 1.0, 2049);
      CHECK(std::abs(direct - composed) <= 1e-8);
    }
  }
}

TEST_CASE("truncation control refuses impossible tolerances") {
  HeatKernelExpansion expansion;
  expansion.max_modes = 3;
  // t small enough that three modes cannot reach the tolerance.
  CHECK_THROWS_AS(expansion.eval(1e-6, 0.5, 0.5, 1e-12), std::invalid_argument);
  CHECK_NOTHROW(expansion.eval(2.0, 0.5, 0.5, 1e-12));
}

TEST_CASE("grid functions clamp the boundary and measure distances") {
  GridFunction f({5.0, 1.0, 2.0, -3.0, 7.0});
  CHECK(f[0] == 0.0);
  CHECK(f[4] == 0.0);
  CHECK(f.intervals() == 4);
  CHECK(f.sup_norm() == 3.0);
  GridFunction g = GridFunction::zeros(4);
  CHECK(f.sup_distance(g) == 3.0);
  CHECK(f.node_x(2) == doctest::Approx(0.5).epsilon(1e-15));
  GridFunction s = GridFunction::sample(8, [](double x) { return x * x; });
  CHECK(s[0] == 0.0);
  CHECK(s[8] == 0.0);  // forced Dirichlet despite x^2 = 1 at the endpoint
  CHECK(s[4] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("semigroup damps eigenmodes by the exact factor") {
  const std::size_t J = 64;
  for (int k : {1, 2, 5}) {
    GridFunction mode = GridFunction::sample(
        J, [&](double x) { return std::sin(k * kPi * x); });
    const double t = 0.1;
    GridFunction damped = semigroup_apply(mode, t);
    const double factor = std::exp(-k * k * kPi * kPi * t / 2.0);
    for (std::size_t j = 0; j <= J; ++j)
      CHECK(std::abs(damped[j] - factor * mode[j]) <= 1e-12);
  }
}

TEST_CASE("semigroup matches kernel quadrature on a generic profile") {
  const std::size_t J = 32;
  GridFunction f = GridFunction::sample(
      J, [](double x) { return x * (1.0 - x) * std::exp(x); });
  const double t = 0.05;
  GridFunction ft = semigroup_apply(f, t);
  for (std::size_t j = 4; j <= J - 4; j += 4) {
    const double x = f.node_x(j);
    // Quadrature of the kernel against the piecewise-linear interpolant of
    // the grid samples is only first-order accurate; compare against the
    // true profile with a matching tolerance.
    const double ref = oracle::simpson(
        [&](double y) {
          return kernel_eval(t, x, y) * y * (1.0 - y) * std::exp(y);
        },
        0.0, 1.0, 2049);
    CHECK(std::abs(ft[j] - ref) <= 5e-4);
  }
}

TEST_CASE("time-integrated squared kernel norm: series identity") {
  // The closed form relies on sum_k 2 sin^2(k pi x) / (k pi)^2 = x(1 - x);
  // check that identity numerically at several x.
  for (double x : {0.1, 0.37, 0.5, 0.81}) {
    double sum = 0.0;
    for (int k = 1; k <= 200000; ++k) {
      const double s = std::sin(k * kPi * x);
      const double kpi = k * kPi;
      sum += 2.0 * s * s / (kpi * kpi);
    }
    CHECK(std::abs(sum - x * (1.0 - x)) <= 1e-5);
  }
}

TEST_CASE("time-integrated squared kernel norm: quadrature cross-check") {
  // int_0^t int_0^1 p_{t-s}(x,y)^2 dy ds = int_0^t p_{2u}(x,x) du; substitute
  // u = v^2 to tame the 1/sqrt(u) singularity. The v -> 0 limit of the
  // transformed integrand is 1/sqrt(pi) (plus exponentially small images).
  for (double t : {0.05, 0.1}) {
    for (double x : {0.3, 0.5}) {
      const double value = kernel_l2_time_integral(t, x);
      const double ref = oracle::simpson(
          [&](double v) {
            // For tiny times the kernel is the whole-line Gaussian up to
            // image terms below e^{-2x^2/(2v^2)} (< 1e-70 here), and the
            // transformed integrand 2v p_{2v^2}(x,x) is exactly 1/sqrt(pi).
            const double t2 = 2.0 * v * v;
            if (t2 < 1e-3) return 1.0 / std::sqrt(kPi);
            return 2.0 * v * kernel_eval(t2, x, x, 1e-13);
          },
          0.0, std::sqrt(t), 4097);
      CHECK(std::abs(value - ref) <= 1e-6);
    }
  }
}

TEST_CASE("frozen spot value and bound") {
  const double spot = kernel_l2_time_integral(0.1, 0.5);
  CHECK(std::abs(spot - 0.17447047655668) <= 1e-9);
  const double bound = std::sqrt(2.0 * 0.1 / kPi);
  CHECK(std::abs(bound - 0.252313252202016) <= 1e-12);
  CHECK(spot < bound);

  // The bound holds across a sweep (checked internally; a throw would fail).
  for (double t : {0.01, 0.05, 0.1, 0.5, 1.0})
    for (int i = 1; i < 20; ++i) {
      const double x = static_cast<double>(i) / 20.0;
      CHECK(kernel_l2_time_integral(t, x) <= std::sqrt(2.0 * t / kPi) + 1e-9);
    }
}

TEST_CASE("semigroup requires positive time") {
  GridFunction f = GridFunction::sample(8, [](double x) { return x; });
  CHECK_THROWS_AS(semigroup_apply(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(semigroup_apply(f, -1.0), std::invalid_argument);
}
