#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "exp_shared.hpp"
#include "tcilab/heat.hpp"

namespace tci::detail {

namespace {

/// Composite Simpson rule on [0,1] with an odd number of nodes.
double simpson01(const std::function<double(double)>& f, std::size_t nodes) {
  const std::size_t intervals = nodes - 1;
  const double h = 1.0 / static_cast<double>(intervals);
  double sum = f(0.0) + f(1.0);
  for (std::size_t i = 1; i < intervals; ++i)
    sum += f(static_cast<double>(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

RunReport run_heat_kernel(const ExpArgs& args) {
  const std::vector<double> t_grid = args.num_list("t_grid");
  const long long x_count = args.integer("x_count");
  if (x_count < 2) throw ConfigError("parameter 'x_count': need at least 2");
  for (double t : t_grid)
    if (t <= 0.0) throw ConfigError("parameter 't_grid': times must be positive");

  RunReport report;
  const double pi = std::numbers::pi;

  // Time-integrated squared L2 norm of the kernel against its bound.
  CsvTable table;
  table.schema = "heat-l2.v1";
  table.columns = {"t", "x", "value", "bound"};
  double max_gap = -std::numeric_limits<double>::infinity();
  bool l2_ok = true;
  std::string l2_detail;
  try {
    for (double t : t_grid) {
      const double bound = std::sqrt(2.0 * t / pi);
      for (long long i = 0; i < x_count; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(x_count - 1);
        const double value = kernel_l2_time_integral(t, x);
        max_gap = std::max(max_gap, value - bound);
        table.rows.push_back({format_double(t), format_double(x),
                              format_double(value), format_double(bound)});
      }
    }
    l2_ok = max_gap <= 1e-9;
    l2_detail = "max(value - bound) = " + format_double(max_gap) + " over " +
                std::to_string(table.rows.size()) + " points";
  } catch (const std::exception& e) {
    l2_ok = false;
    l2_detail = e.what();
  }
  report.assertions.push_back(check("kernel-l2-bound", l2_ok, l2_detail));
  write_csv(args.path_of("heat-l2.csv"), table);
  report.csv_paths.push_back("heat-l2.csv");

  // Frozen spot values at t = 0.1, x = 0.5.
  const double spot = kernel_l2_time_integral(0.1, 0.5);
  const double spot_bound = std::sqrt(0.2 / pi);
  const bool spot_ok = std::abs(spot - 0.1744703) <= 1e-6 &&
                       std::abs(spot_bound - 0.2523132) <= 1e-6 && spot < spot_bound;
  report.assertions.push_back(
      check("spot-value", spot_ok,
            "value(0.1, 0.5) = " + format_double(spot) + " vs bound " +
                format_double(spot_bound)));

  // The kernel reproduces itself under composition of times (quadrature in
  // the middle variable).
  const double s_time = 0.1, t_time = 0.2;
  double ck_error = 0.0;
  for (double x : {0.3, 0.5}) {
    for (double y : {0.5, 0.7}) {
      const double direct = kernel_eval(s_time + t_time, x, y);
      const double composed = simpson01(
          [&](double z) { return kernel_eval(s_time, x, z) * kernel_eval(t_time, z, y); },
          2049);
      ck_error = std::max(ck_error, std::abs(direct - composed));
    }
  }
  report.assertions.push_back(check(
      "chapman-kolmogorov", ck_error <= 1e-8,
      "max |p_{s+t} - int p_s p_t| = " + format_double(ck_error) + " at s = 0.1, t = 0.2"));

  // The semigroup damps the k-th sine mode by exp(-k^2 pi^2 t / 2) exactly
  // (the sampled sine is an eigenvector of the discrete transform).
  double eigen_error = 0.0;
  const double t_eig = 0.1;
  for (int k : {1, 2}) {
    const GridFunction mode = GridFunction::sample(
        64, [&](double x) { return std::sin(k * pi * x); });
    const GridFunction damped = semigroup_apply(mode, t_eig);
    const double factor = std::exp(-k * k * pi * pi * t_eig / 2.0);
    for (std::size_t j = 0; j < mode.nodes(); ++j)
      eigen_error = std::max(eigen_error, std::abs(damped[j] - factor * mode[j]));
  }
  report.assertions.push_back(
      check("semigroup-eigenmode", eigen_error <= 1e-12,
            "max node error over modes 1,2 = " + format_double(eigen_error)));

  nlohmann::json metrics;
  metrics["spot_value"] = spot;
  metrics["spot_bound"] = spot_bound;
  metrics["max_value_minus_bound"] = max_gap;
  metrics["chapman_kolmogorov_error"] = ck_error;
  metrics["eigenmode_error"] = eigen_error;
  report.metrics_json = metrics.dump();
  return report;
}

}  // namespace tci::detail
