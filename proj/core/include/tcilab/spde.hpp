#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcilab/heat.hpp"
#include "tcilab/parallel.hpp"

namespace tci {

/// A scalar coefficient from the closed catalog, carrying its Lipschitz
/// constant and boundedness so the coupling analysis can bookkeep K.
struct Coefficient {
  std::string name;
  std::function<double(double)> fn;
  double lipschitz = 0.0;
  bool bounded = false;

  double operator()(double v) const { return fn(v); }
};

/// A named (drift b, noise sigma) pair. sigma is always bounded and both
/// coefficients are Lipschitz; lipschitz_K = max(Lip b, Lip sigma).
struct CoeffPair {
  std::string name;
  Coefficient b;
  Coefficient sigma;
  double lipschitz_K = 0.0;
};

/// The catalog is closed so K stays bookkept:
///   zero         b = 0,        sigma = 0,        K = 0
///   additive     b = 0,        sigma = 1,        K = 0
///   drift_const  b = 1,        sigma = 0,        K = 0
///   drift_linear b = v,        sigma = 0,        K = 1
///   sin          b = sin(v),   sigma = sin(v),   K = 1
///   sin_noise    b = 0,        sigma = sin(v),   K = 1
/// Unknown names are rejected.
CoeffPair coeff_catalog(const std::string& name);
const std::vector<std::string>& coeff_catalog_names();

/// Scalar catalog used for the convolution forcing gamma: zero, one, sin.
Coefficient scalar_coefficient(const std::string& name);

/// Discretization of the reaction-diffusion equation with space-time white
/// noise on [0,1], Dirichlet boundary: J spatial intervals (nodes j/J),
/// fixed step dt that must divide the horizon T. The scheme is semi-implicit
/// (implicit diffusion, explicit reaction and noise), unconditionally stable
/// in the diffusion part.
struct SpdeConfig {
  std::size_t intervals = 64;  // J
  double dt = 0.25 / 512.0;
  double horizon = 0.25;  // T
  CoeffPair coeffs = coeff_catalog("zero");
  std::uint64_t seed = 0;
  std::size_t n_paths = 2;

  void validate() const;  // throws std::invalid_argument on any bad field
  double dx() const { return 1.0 / static_cast<double>(intervals); }
  std::size_t time_levels() const;  // N = T/dt (validated integral)
};

/// The standard-normal increments driving one path: xi[n][j] for time level
/// n in [0, N) and interior node j in [1, J-1], drawn sequentially from the
/// substream keyed by (seed, path_id). Identical (seed, path_id) yields an
/// identical field regardless of threading.
class NoiseField {
public:
  NoiseField(const SpdeConfig& config, std::uint64_t path_id);

  double xi(std::size_t level, std::size_t node) const {
    return draws_[level * interior_ + (node - 1)];
  }
  /// The J-1 interior draws of one time level.
  std::span<const double> row(std::size_t level) const {
    return {draws_.data() + level * interior_, interior_};
  }
  std::size_t levels() const { return levels_; }

private:
  std::size_t interior_ = 0;
  std::size_t levels_ = 0;
  std::vector<double> draws_;
};

/// A full trajectory: u[n][j], n = 0..N time levels, j = 0..J nodes, with
/// u[n][0] = u[n][J] = 0 at every level. path_id is recorded when the path
/// was produced from a noise field, so the field can be regenerated.
struct GridPath {
  std::vector<std::vector<double>> u;
  std::optional<std::uint64_t> path_id;

  std::size_t levels() const { return u.size() - 1; }    // N
  std::size_t intervals() const { return u[0].size() - 1; }
  double at(std::size_t n, std::size_t j) const { return u[n][j]; }
};

/// One step of the semi-implicit scheme: solves
///   (I - (dt/2) L_h) u_next = u + dt b(u) + sigma(u) . xi sqrt(dt/dx)
/// with L_h the second-difference operator / dx^2, via the tridiagonal
/// (Thomas) algorithm. noise_row carries the J-1 interior draws; the output
/// is Dirichlet-zero. Throws on non-finite input or output.
std::vector<double> step(std::span<const double> state,
                         std::span<const double> noise_row,
                         const SpdeConfig& config);

/// Trajectory from u0 = f under NoiseField(config, path_id). Blow-up (any
/// non-finite value) raises an error naming the offending time level.
GridPath simulate(const SpdeConfig& config, const GridFunction& f,
                  std::uint64_t path_id);

/// Synchronous coupling: two trajectories driven by the identical noise
/// field. f = g yields bitwise-equal outputs.
std::pair<GridPath, GridPath> simulate_coupled(const SpdeConfig& config,
                                               const GridFunction& f,
                                               const GridFunction& g,
                                               std::uint64_t path_id);

/// Monte Carlo estimate over n_paths >= 2 coupled paths of
///   E[ sup_{n,j} |u^f_n(j) - u^g_n(j)|^2 ]
/// (the sup includes level 0, i.e. the initial distance) with a 95%
/// normal-approximation half-width. Deterministic given (config, seed).
MeanSummary sup_distance_moment(const SpdeConfig& config, const GridFunction& f,
                                const GridFunction& g, unsigned threads = 0);

struct RatioRow {
  std::size_t pair_id = 0;
  double rho_squared = 0.0;   // sup_j |f - g|^2
  double estimate = 0.0;      // E[sup^2]
  double half_width = 0.0;
  double ratio = 0.0;         // estimate / rho_squared
  double ratio_upper = 0.0;   // (estimate + half_width) / rho_squared
};

struct RatioScan {
  std::vector<RatioRow> rows;
  double fitted_c2 = 0.0;  // max_i ratio_upper_i: bounds every ratio + CI
  /// Pairs elementwise proportional to pair 0 (lambda-scalings of it),
  /// including pair 0 itself; the coupling bound should not depend on the
  /// scaling, so the spread of their ratio_upper is reported.
  std::vector<std::size_t> scaling_subfamily;
  double scaling_spread = 0.0;  // max/min ratio_upper over the subfamily
  bool scaling_stable = false;  // spread < 2 (only set with >= 2 members)
};

/// Ratio scan behind the coupling estimate: for each pair,
/// ratio = E[sup^2] / rho(f,g)^2, and fitted_c2 = max(ratio + hw/rho^2).
/// Every pair must have rho(f,g) > 0. The same path ids drive every pair
/// (common random numbers).
RatioScan lipschitz_ratio_scan(
    const SpdeConfig& config,
    std::span<const std::pair<GridFunction, GridFunction>> pairs,
    unsigned threads = 0);

struct ConvolutionCheck {
  std::vector<double> t_grid;     // t_n = n dt, n = 1..N
  std::vector<double> lhs;        // E[ sup_{m<=n, j} v_m(j)^2 ]
  std::vector<double> gamma_sup;  // E[ sup_{m<=n, j} gamma(u_m(j))^2 ]
  std::vector<double> integral;   // dt * sum_{m<n} gamma_sup contributions
  double eps = 0.0;
  double fitted_C = 0.0;          // minimal C with lhs <= eps*gamma_sup + C*integral
  bool lhs_nondecreasing = false; // exact: per-path running sup is monotone
  double fixed_point_lhs = 0.0;   // E[ v_N(x_mid)^2 ], x_mid = node J/2
  double fixed_point_hw = 0.0;    // its 95% half-width
  bool isometry_applicable = false;  // gamma is constant
  double isometry_value = 0.0;       // exact discrete isometry at (T, x_mid)
  double continuum_bound = 0.0;      // kernel_l2_time_integral(T, x_mid)
};

/// Discrete stochastic convolution driven by gamma(u) along a simulated path
/// of `config`: v_0 = 0, v_{n+1} = A (v_n + gamma(u_n) . xi_n sqrt(dt/dx)),
/// with A the implicit-diffusion solve and the same noise as u. Estimates
/// the running-sup moment on every time level, fits the minimal C making
///   lhs(t) <= eps * gamma_sup(t) + C * integral(t)
/// hold on the whole grid, and reports the fixed-point moment at (T, x_mid)
/// with its exact discrete-isometry value when gamma is constant (the
/// running-sup estimate dominates the fixed-point one pathwise). u starts
/// from f0.
ConvolutionCheck stochastic_convolution_check(const SpdeConfig& config,
                                              const Coefficient& gamma,
                                              double eps, const GridFunction& f0,
                                              unsigned threads = 0);

/// Max over (n, j) of |u - reconstruction| where the reconstruction is the
/// discrete Duhamel form
///   A^n f + sum_{m<n} A^{n-m} [dt b(u_m) + sigma(u_m) . xi_m sqrt(dt/dx)],
/// with each summand propagated independently (a genuinely different
/// summation order from the recursion, which nests the terms). The recursion
/// IS this formula, so the residual is pure rounding accumulation. Requires
/// the path's noise field to be regenerable (path_id set).
double mild_residual(const GridPath& path, const SpdeConfig& config,
                     const GridFunction& f);

/// Node-wise Monte Carlo mean of u at the horizon against the spectral
/// semigroup solution semigroup_apply(f, T): with b = 0 the noise term has
/// mean zero, so the mean field must match within sampling error (plus the
/// scheme's O(dt + dx^2) bias). Counts interior nodes within 3 standard
/// errors.
struct MeanFieldCheck {
  std::vector<double> mc_mean;    // nodes 0..J
  std::vector<double> se;         // per-node standard error of the mean
  std::vector<double> reference;  // semigroup_apply(f, horizon) values
  std::size_t within_3se = 0;
  std::size_t interior_nodes = 0;

  double fraction_within() const {
    return interior_nodes == 0
               ? 1.0
               : static_cast<double>(within_3se) / static_cast<double>(interior_nodes);
  }
};
MeanFieldCheck mean_field_check(const SpdeConfig& config, const GridFunction& f,
                                unsigned threads = 0);

/// Initial profile grammar "name" or "name:amplitude": zero, sin (sin pi x),
/// sin2 (sin 2 pi x), sin3 (sin 3 pi x), hat (1 - |2x - 1|), quad (4x(1-x)),
/// each scaled by the amplitude (default 1).
GridFunction initial_profile(const std::string& text, std::size_t intervals);

}  // namespace tci
