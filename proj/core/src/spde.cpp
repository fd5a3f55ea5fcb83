#include "tcilab/spde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "tcilab/rng.hpp"

namespace tci {

namespace {

Coefficient make_zero() {
  return {"zero", [](double) { return 0.0; }, 0.0, true};
}
Coefficient make_one() {
  return {"one", [](double) { return 1.0; }, 0.0, true};
}
Coefficient make_identity() {
  return {"identity", [](double v) { return v; }, 1.0, false};
}
Coefficient make_sin() {
  return {"sin", [](double v) { return std::sin(v); }, 1.0, true};
}

}  // namespace

Coefficient scalar_coefficient(const std::string& name) {
  if (name == "zero") return make_zero();
  if (name == "one") return make_one();
  if (name == "sin") return make_sin();
  throw std::invalid_argument("unknown scalar coefficient '" + name +
                              "' (choose zero, one, sin)");
}

CoeffPair coeff_catalog(const std::string& name) {
  if (name == "zero") return {name, make_zero(), make_zero(), 0.0};
  if (name == "additive") return {name, make_zero(), make_one(), 0.0};
  if (name == "drift_const") return {name, make_one(), make_zero(), 0.0};
  if (name == "drift_linear") return {name, make_identity(), make_zero(), 1.0};
  if (name == "sin") return {name, make_sin(), make_sin(), 1.0};
  if (name == "sin_noise") return {name, make_zero(), make_sin(), 1.0};
  throw std::invalid_argument("unknown coefficient pair '" + name + "'");
}

const std::vector<std::string>& coeff_catalog_names() {
  static const std::vector<std::string> names = {
      "zero", "additive", "drift_const", "drift_linear", "sin", "sin_noise"};
  return names;
}

void SpdeConfig::validate() const {
  if (intervals < 4)
    throw std::invalid_argument("config: need at least 4 spatial intervals");
  if (!std::isfinite(dt) || dt <= 0.0)
    throw std::invalid_argument("config: dt must be positive");
  if (!std::isfinite(horizon) || horizon <= 0.0)
    throw std::invalid_argument("config: horizon must be positive");
  if (dt > horizon) throw std::invalid_argument("config: dt exceeds the horizon");
  const double ratio = horizon / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
    throw std::invalid_argument("config: dt must divide the horizon");
  if (n_paths < 1) throw std::invalid_argument("config: n_paths must be positive");
  if (!coeffs.b.fn || !coeffs.sigma.fn)
    throw std::invalid_argument("config: coefficients missing");
  if (!coeffs.sigma.bounded)
    throw std::invalid_argument("config: the noise coefficient must be bounded");
  if (coeffs.lipschitz_K <
      std::max(coeffs.b.lipschitz, coeffs.sigma.lipschitz) - 1e-15)
    throw std::invalid_argument("config: lipschitz_K understates the coefficients");
}

std::size_t SpdeConfig::time_levels() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

NoiseField::NoiseField(const SpdeConfig& config, std::uint64_t path_id)
    : interior_(config.intervals - 1), levels_(config.time_levels()) {
  config.validate();
  NormalStream stream(config.seed, path_id);
  draws_.resize(levels_ * interior_);
  for (double& d : draws_) d = stream.next();
}

namespace {

/// Tridiagonal solver for (I - (dt/2) L_h) x = rhs on the J-1 interior
/// nodes: diagonal 1 + 2r, off-diagonals -r, r = dt / (2 dx^2). The
/// elimination coefficients depend only on the config, so they are computed
/// once; each solve is then a forward sweep plus back substitution.
class ImplicitSolver {
public:
  explicit ImplicitSolver(const SpdeConfig& config)
      : n_(config.intervals - 1),
        r_(config.dt / (2.0 * config.dx() * config.dx())) {
    const double diag = 1.0 + 2.0 * r_;
    upper_.resize(n_);
    inv_denom_.resize(n_);
    double denom = diag;
    inv_denom_[0] = 1.0 / denom;
    upper_[0] = -r_ * inv_denom_[0];
    for (std::size_t i = 1; i < n_; ++i) {
      denom = diag + r_ * upper_[i - 1];
      inv_denom_[i] = 1.0 / denom;
      upper_[i] = -r_ * inv_denom_[i];
    }
  }

  /// In-place solve on an interior-sized vector.
  void solve(std::vector<double>& x) const {
    x[0] *= inv_denom_[0];
    for (std::size_t i = 1; i < n_; ++i)
      x[i] = (x[i] + r_ * x[i - 1]) * inv_denom_[i];
    for (std::size_t i = n_ - 1; i-- > 0;) x[i] -= upper_[i] * x[i + 1];
  }

private:
  std::size_t n_;
  double r_;
  std::vector<double> upper_;      // modified super-diagonal coefficients
  std::vector<double> inv_denom_;  // reciprocals of the pivot denominators
};

/// One scheme step on full-grid state (writes a fresh full-grid vector).
std::vector<double> step_impl(std::span<const double> state,
                              std::span<const double> noise_row,
                              const SpdeConfig& config,
                              const ImplicitSolver& solver) {
  const double scale = std::sqrt(config.dt / config.dx());
  std::vector<double> interior(config.intervals - 1);
  for (std::size_t j = 1; j < config.intervals; ++j) {
    const double u = state[j];
    interior[j - 1] = u + config.dt * config.coeffs.b(u) +
                      config.coeffs.sigma(u) * noise_row[j - 1] * scale;
  }
  solver.solve(interior);
  std::vector<double> out(config.intervals + 1, 0.0);
  std::copy(interior.begin(), interior.end(), out.begin() + 1);
  return out;
}

void check_profile(const GridFunction& f, const SpdeConfig& config,
                   const char* who) {
  if (f.intervals() != config.intervals)
    throw std::invalid_argument(std::string(who) +
                                ": initial profile has the wrong grid size");
}

void check_finite_level(const std::vector<double>& level, std::size_t n,
                        const char* who) {
  for (double v : level)
    if (!std::isfinite(v))
      throw std::runtime_error(std::string(who) +
                               ": solution blew up (non-finite value) at time level " +
                               std::to_string(n));
}

}  // namespace

std::vector<double> step(std::span<const double> state,
                         std::span<const double> noise_row,
                         const SpdeConfig& config) {
  config.validate();
  if (state.size() != config.intervals + 1)
    throw std::invalid_argument("step: state has the wrong grid size");
  if (noise_row.size() != config.intervals - 1)
    throw std::invalid_argument("step: noise row has the wrong size");
  if (state.front() != 0.0 || state.back() != 0.0)
    throw std::invalid_argument("step: state violates the Dirichlet boundary");
  for (double v : state)
    if (!std::isfinite(v)) throw std::runtime_error("step: non-finite state");
  const ImplicitSolver solver(config);
  std::vector<double> out = step_impl(state, noise_row, config, solver);
  check_finite_level(out, 1, "step");
  return out;
}

GridPath simulate(const SpdeConfig& config, const GridFunction& f,
                  std::uint64_t path_id) {
  config.validate();
  check_profile(f, config, "simulate");
  const NoiseField noise(config, path_id);
  const ImplicitSolver solver(config);
  const std::size_t levels = config.time_levels();
  GridPath path;
  path.path_id = path_id;
  path.u.reserve(levels + 1);
  path.u.push_back(f.values());
  for (std::size_t n = 0; n < levels; ++n) {
    path.u.push_back(step_impl(path.u.back(), noise.row(n), config, solver));
    check_finite_level(path.u.back(), n + 1, "simulate");
  }
  return path;
}

std::pair<GridPath, GridPath> simulate_coupled(const SpdeConfig& config,
                                               const GridFunction& f,
                                               const GridFunction& g,
                                               std::uint64_t path_id) {
  config.validate();
  check_profile(f, config, "simulate_coupled");
  check_profile(g, config, "simulate_coupled");
  const NoiseField noise(config, path_id);
  const ImplicitSolver solver(config);
  const std::size_t levels = config.time_levels();
  GridPath pf, pg;
  pf.path_id = path_id;
  pg.path_id = path_id;
  pf.u.reserve(levels + 1);
  pg.u.reserve(levels + 1);
  pf.u.push_back(f.values());
  pg.u.push_back(g.values());
  for (std::size_t n = 0; n < levels; ++n) {
    pf.u.push_back(step_impl(pf.u.back(), noise.row(n), config, solver));
    pg.u.push_back(step_impl(pg.u.back(), noise.row(n), config, solver));
    check_finite_level(pf.u.back(), n + 1, "simulate_coupled");
    check_finite_level(pg.u.back(), n + 1, "simulate_coupled");
  }
  return {std::move(pf), std::move(pg)};
}

MeanSummary sup_distance_moment(const SpdeConfig& config, const GridFunction& f,
                                const GridFunction& g, unsigned threads) {
  config.validate();
  check_profile(f, config, "sup_distance_moment");
  check_profile(g, config, "sup_distance_moment");
  if (config.n_paths < 2)
    throw std::invalid_argument("sup_distance_moment: need n_paths >= 2");
  std::vector<double> sup_sq(config.n_paths, 0.0);
  parallel_for(config.n_paths, threads, [&](std::size_t p) {
    const auto [pf, pg] = simulate_coupled(config, f, g, p);
    double sup = 0.0;
    for (std::size_t n = 0; n < pf.u.size(); ++n)
      for (std::size_t j = 0; j < pf.u[n].size(); ++j)
        sup = std::max(sup, std::abs(pf.u[n][j] - pg.u[n][j]));
    sup_sq[p] = sup * sup;
  });
  return summarize_mean(sup_sq);
}

namespace {

/// Detects pairs that are lambda-scalings of the reference pair: both
/// components elementwise proportional with one common positive factor.
bool is_scaling_of(const std::pair<GridFunction, GridFunction>& ref,
                   const std::pair<GridFunction, GridFunction>& cand,
                   double& lambda_out) {
  const double sf = ref.first.sup_norm(), sg = ref.second.sup_norm();
  double lambda = -1.0;
  if (sf > 0.0) {
    lambda = cand.first.sup_norm() / sf;
  } else if (sg > 0.0) {
    lambda = cand.second.sup_norm() / sg;
  } else {
    return false;  // degenerate reference (both components zero)
  }
  if (!(lambda > 0.0)) return false;
  const auto matches = [lambda](const GridFunction& a, const GridFunction& b) {
    const double tol = 1e-12 * (1.0 + lambda * a.sup_norm());
    for (std::size_t j = 0; j < a.nodes(); ++j)
      if (std::abs(lambda * a[j] - b[j]) > tol) return false;
    return true;
  };
  if (!matches(ref.first, cand.first) || !matches(ref.second, cand.second))
    return false;
  lambda_out = lambda;
  return true;
}

}  // namespace

RatioScan lipschitz_ratio_scan(
    const SpdeConfig& config,
    std::span<const std::pair<GridFunction, GridFunction>> pairs,
    unsigned threads) {
  config.validate();
  if (pairs.empty())
    throw std::invalid_argument("lipschitz_ratio_scan: need at least one pair");
  RatioScan scan;
  scan.rows.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double rho = pairs[i].first.sup_distance(pairs[i].second);
    if (!(rho > 0.0))
      throw std::invalid_argument("lipschitz_ratio_scan: pair " +
                                  std::to_string(i) +
                                  " has zero initial distance");
    const MeanSummary m =
        sup_distance_moment(config, pairs[i].first, pairs[i].second, threads);
    RatioRow row;
    row.pair_id = i;
    row.rho_squared = rho * rho;
    row.estimate = m.mean;
    row.half_width = m.half_width;
    row.ratio = m.mean / row.rho_squared;
    row.ratio_upper = (m.mean + m.half_width) / row.rho_squared;
    scan.fitted_c2 = std::max(scan.fitted_c2, row.ratio_upper);
    scan.rows.push_back(row);
  }
  scan.scaling_subfamily.push_back(0);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    double lambda = 0.0;
    if (is_scaling_of(pairs[0], pairs[i], lambda))
      scan.scaling_subfamily.push_back(i);
  }
  if (scan.scaling_subfamily.size() >= 2) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i : scan.scaling_subfamily) {
      lo = std::min(lo, scan.rows[i].ratio_upper);
      hi = std::max(hi, scan.rows[i].ratio_upper);
    }
    scan.scaling_spread = hi / lo;
    scan.scaling_stable = scan.scaling_spread < 2.0;
  }
  return scan;
}

ConvolutionCheck stochastic_convolution_check(const SpdeConfig& config,
                                              const Coefficient& gamma,
                                              double eps, const GridFunction& f0,
                                              unsigned threads) {
  config.validate();
  check_profile(f0, config, "stochastic_convolution_check");
  if (!gamma.fn)
    throw std::invalid_argument("stochastic_convolution_check: gamma missing");
  if (!gamma.bounded)
    throw std::invalid_argument("stochastic_convolution_check: gamma must be bounded");
  if (!(eps > 0.0))
    throw std::invalid_argument("stochastic_convolution_check: eps must be positive");
  if (config.n_paths < 2)
    throw std::invalid_argument("stochastic_convolution_check: need n_paths >= 2");

  const std::size_t levels = config.time_levels();
  const std::size_t mid = config.intervals / 2;
  const ImplicitSolver solver(config);
  const double scale = std::sqrt(config.dt / config.dx());

  // Per-path, per-level records (running sups are monotone pathwise).
  std::vector<std::vector<double>> run_v(config.n_paths),
      run_g(config.n_paths), level_g(config.n_paths);
  std::vector<double> fixed_point(config.n_paths, 0.0);

  parallel_for(config.n_paths, threads, [&](std::size_t p) {
    const NoiseField noise(config, p);
    std::vector<double> u = f0.values();
    std::vector<double> v(config.intervals - 1, 0.0);  // interior of the convolution
    run_v[p].assign(levels + 1, 0.0);
    run_g[p].assign(levels + 1, 0.0);
    level_g[p].assign(levels + 1, 0.0);
    double sup_v = 0.0, sup_g = 0.0;
    const auto gamma_sup_at = [&](const std::vector<double>& field) {
      double s = 0.0;
      for (double val : field) s = std::max(s, std::abs(gamma(val)));
      return s * s;
    };
    level_g[p][0] = gamma_sup_at(u);
    sup_g = level_g[p][0];
    run_g[p][0] = sup_g;
    for (std::size_t n = 0; n < levels; ++n) {
      // Forcing is evaluated on the pre-step field, then both recursions
      // advance with the same noise row.
      const std::span<const double> row = noise.row(n);
      for (std::size_t j = 1; j < config.intervals; ++j)
        v[j - 1] += gamma(u[j]) * row[j - 1] * scale;
      solver.solve(v);
      u = step_impl(u, row, config, solver);
      check_finite_level(u, n + 1, "stochastic_convolution_check");
      for (double val : v)
        if (!std::isfinite(val))
          throw std::runtime_error(
              "stochastic_convolution_check: convolution blew up at time level " +
              std::to_string(n + 1));
      for (double val : v) sup_v = std::max(sup_v, std::abs(val));
      run_v[p][n + 1] = sup_v * sup_v;
      level_g[p][n + 1] = gamma_sup_at(u);
      sup_g = std::max(sup_g, level_g[p][n + 1]);
      run_g[p][n + 1] = sup_g;
    }
    fixed_point[p] = v[mid - 1] * v[mid - 1];
  });

  ConvolutionCheck out;
  out.eps = eps;
  out.t_grid.resize(levels);
  out.lhs.resize(levels);
  out.gamma_sup.resize(levels);
  out.integral.resize(levels);
  std::vector<double> tmp(config.n_paths);
  const auto mean_at = [&](const std::vector<std::vector<double>>& rec,
                           std::size_t n) {
    for (std::size_t p = 0; p < config.n_paths; ++p) tmp[p] = rec[p][n];
    return pairwise_sum(tmp) / static_cast<double>(config.n_paths);
  };
  double integral = 0.0;
  for (std::size_t n = 1; n <= levels; ++n) {
    out.t_grid[n - 1] = static_cast<double>(n) * config.dt;
    out.lhs[n - 1] = mean_at(run_v, n);
    out.gamma_sup[n - 1] = mean_at(run_g, n);
    integral += config.dt * mean_at(level_g, n - 1);  // left Riemann sum
    out.integral[n - 1] = integral;
  }
  out.lhs_nondecreasing = true;
  for (std::size_t n = 1; n < levels; ++n)
    if (out.lhs[n] < out.lhs[n - 1]) out.lhs_nondecreasing = false;
  for (std::size_t n = 0; n < levels; ++n) {
    const double excess = out.lhs[n] - eps * out.gamma_sup[n];
    if (out.integral[n] > 0.0)
      out.fitted_C = std::max(out.fitted_C, excess / out.integral[n]);
  }
  out.fitted_C = std::max(0.0, out.fitted_C);

  {
    const MeanSummary fp = summarize_mean(fixed_point);
    out.fixed_point_lhs = fp.mean;
    out.fixed_point_hw = fp.half_width;
  }
  out.continuum_bound =
      kernel_l2_time_integral(config.horizon,
                              static_cast<double>(mid) / static_cast<double>(config.intervals));
  if (gamma.lipschitz == 0.0) {
    // Constant forcing: the discrete Ito isometry gives the fixed-point
    // second moment exactly as (dt/dx) gamma^2 sum_k |A^k e_mid|^2.
    out.isometry_applicable = true;
    const double g0 = gamma(0.0);
    std::vector<double> e(config.intervals - 1, 0.0);
    e[mid - 1] = 1.0;
    double acc = 0.0;
    for (std::size_t k = 1; k <= levels; ++k) {
      solver.solve(e);
      double norm_sq = 0.0;
      for (double val : e) norm_sq += val * val;
      acc += norm_sq;
    }
    out.isometry_value = (config.dt / config.dx()) * g0 * g0 * acc;
  }
  return out;
}

double mild_residual(const GridPath& path, const SpdeConfig& config,
                     const GridFunction& f) {
  config.validate();
  check_profile(f, config, "mild_residual");
  if (!path.path_id)
    throw std::runtime_error("mild_residual: the path carries no noise field id");
  const std::size_t levels = config.time_levels();
  if (path.u.size() != levels + 1 || path.u[0].size() != config.intervals + 1)
    throw std::invalid_argument("mild_residual: path shape does not match the config");
  if (path.u[0] != f.values())
    throw std::invalid_argument("mild_residual: the path does not start at f");

  const NoiseField noise(config, *path.path_id);
  const ImplicitSolver solver(config);
  const std::size_t interior = config.intervals - 1;
  const double scale = std::sqrt(config.dt / config.dx());

  // rec[n] accumulates the discrete Duhamel sum on the interior nodes:
  // first the semigroup powers of f, then each forcing increment propagated
  // independently -- a different summation order from the recursion.
  std::vector<std::vector<double>> rec(levels + 1,
                                       std::vector<double>(interior, 0.0));
  std::vector<double> prop(f.values().begin() + 1, f.values().end() - 1);
  rec[0] = prop;
  for (std::size_t n = 1; n <= levels; ++n) {
    solver.solve(prop);
    rec[n] = prop;
  }
  std::vector<double> h(interior);
  for (std::size_t m = 0; m < levels; ++m) {
    const std::span<const double> row = noise.row(m);
    for (std::size_t j = 1; j < config.intervals; ++j) {
      const double u = path.u[m][j];
      h[j - 1] = config.dt * config.coeffs.b(u) +
                 config.coeffs.sigma(u) * row[j - 1] * scale;
    }
    for (std::size_t k = m + 1; k <= levels; ++k) {
      solver.solve(h);
      for (std::size_t j = 0; j < interior; ++j) rec[k][j] += h[j];
    }
  }

  double residual = 0.0;
  for (std::size_t n = 0; n <= levels; ++n)
    for (std::size_t j = 0; j < interior; ++j)
      residual = std::max(residual, std::abs(path.u[n][j + 1] - rec[n][j]));
  return residual;
}

MeanFieldCheck mean_field_check(const SpdeConfig& config, const GridFunction& f,
                                unsigned threads) {
  config.validate();
  check_profile(f, config, "mean_field_check");
  if (config.n_paths < 2)
    throw std::invalid_argument("mean_field_check: need n_paths >= 2");
  if (config.coeffs.b.lipschitz != 0.0 || config.coeffs.b(0.0) != 0.0)
    throw std::invalid_argument(
        "mean_field_check: requires zero drift (the mean-zero argument needs it)");

  const std::size_t j_count = config.intervals + 1;
  std::vector<std::vector<double>> finals(config.n_paths);
  parallel_for(config.n_paths, threads, [&](std::size_t p) {
    finals[p] = simulate(config, f, p).u.back();
  });

  MeanFieldCheck out;
  out.mc_mean.assign(j_count, 0.0);
  out.se.assign(j_count, 0.0);
  out.reference = semigroup_apply(f, config.horizon).values();
  out.interior_nodes = config.intervals - 1;
  std::vector<double> tmp(config.n_paths);
  const double root_n = std::sqrt(static_cast<double>(config.n_paths));
  for (std::size_t j = 0; j < j_count; ++j) {
    for (std::size_t p = 0; p < config.n_paths; ++p) tmp[p] = finals[p][j];
    const MeanSummary s = summarize_mean(tmp);
    out.mc_mean[j] = s.mean;
    out.se[j] = s.sd / root_n;
    if (j > 0 && j < config.intervals &&
        std::abs(s.mean - out.reference[j]) <= 3.0 * out.se[j])
      ++out.within_3se;
  }
  return out;
}

GridFunction initial_profile(const std::string& text, std::size_t intervals) {
  std::string name = text;
  double amp = 1.0;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    const std::string amp_text = text.substr(colon + 1);
    std::size_t used = 0;
    try {
      amp = std::stod(amp_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (amp_text.empty() || used != amp_text.size() || !std::isfinite(amp))
      throw std::invalid_argument("initial profile '" + text +
                                  "': bad amplitude '" + amp_text + "'");
  }
  const double pi = std::numbers::pi;
  if (name == "zero") {
    GridFunction z = GridFunction::zeros(intervals);
    return z;
  }
  if (name == "sin")
    return GridFunction::sample(intervals,
                                [&](double x) { return amp * std::sin(pi * x); });
  if (name == "sin2")
    return GridFunction::sample(
        intervals, [&](double x) { return amp * std::sin(2.0 * pi * x); });
  if (name == "sin3")
    return GridFunction::sample(
        intervals, [&](double x) { return amp * std::sin(3.0 * pi * x); });
  if (name == "hat")
    return GridFunction::sample(
        intervals, [&](double x) { return amp * (1.0 - std::abs(2.0 * x - 1.0)); });
  if (name == "quad")
    return GridFunction::sample(
        intervals, [&](double x) { return amp * 4.0 * x * (1.0 - x); });
  throw std::invalid_argument("unknown initial profile '" + name +
                              "' (choose zero, sin, sin2, sin3, hat, quad)");
}

}  // namespace tci
