#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "exp_shared.hpp"
#include "tcilab/gaussian.hpp"
#include "tcilab/rng.hpp"

namespace tci::detail {

RunReport run_gaussian_t2(const ExpArgs& args) {
  const long long random_members = args.integer("random_members");
  if (random_members < 0)
    throw ConfigError("parameter 'random_members': must be nonnegative");

  // Pinned grid: mean shifts (sharp cases), then sdev changes, then the
  // random cloud. mu is the standard Gaussian of the matching dimension.
  const std::vector<double> shifts = {0.1, 0.5, 1.0, 2.0, 3.0};
  const std::vector<double> sdevs = {0.5, 2.0, 4.0};
  std::vector<GaussianParams> family;
  std::vector<std::string> tags;
  for (double m : shifts) {
    family.push_back(GaussianParams({m}, {1.0}));
    tags.push_back("shift");
  }
  for (double s : sdevs) {
    family.push_back(GaussianParams({0.0}, {s}));
    tags.push_back("sdev");
  }
  NormalStream rng(args.seed, 0);
  for (long long i = 0; i < random_members; ++i) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rng.next_index(8));
    std::vector<double> mean(dim), sdev(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      mean[k] = rng.next_uniform(-3.0, 3.0);
      sdev[k] = rng.next_uniform(0.25, 4.0);
    }
    family.emplace_back(std::move(mean), std::move(sdev));
    tags.push_back("random");
  }

  // The one-dimensional members are swept against the 1-d standard Gaussian;
  // the random cloud is swept per-dimension.
  RunReport report;
  std::vector<TalagrandCase> cases;
  std::size_t violations = 0, sharpness_violations = 0;
  double max_ratio = 0.0;
  for (std::size_t d = 1; d <= 8; ++d) {
    std::vector<GaussianParams> bucket;
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (family[i].dim() == d) {
        bucket.push_back(family[i]);
        ids.push_back(i);
      }
    }
    if (bucket.empty()) continue;
    const TalagrandReport sweep = talagrand_sweep(GaussianParams::standard(d), bucket);
    violations += sweep.violations.size();
    sharpness_violations += sweep.sharpness_violations.size();
    max_ratio = std::max(max_ratio, sweep.max_ratio);
    for (std::size_t k = 0; k < sweep.cases.size(); ++k) {
      TalagrandCase c = sweep.cases[k];
      c.id = ids[k];  // restore the family-wide id
      cases.push_back(c);
    }
  }
  std::sort(cases.begin(), cases.end(),
            [](const TalagrandCase& a, const TalagrandCase& b) { return a.id < b.id; });

  // Sharpness on the pinned mean-shift grid: every ratio equals 1 exactly.
  double worst_shift_gap = 0.0;
  for (std::size_t i = 0; i < shifts.size(); ++i)
    worst_shift_gap = std::max(worst_shift_gap, std::abs(cases[i].ratio - 1.0));
  report.assertions.push_back(check(
      "sharpness-mean-shift", worst_shift_gap <= 1e-12 && sharpness_violations == 0,
      "max |ratio - 1| over mean shifts = " + format_double(worst_shift_gap)));

  // Changing any sdev away from 1 makes the inequality strict.
  double worst_sdev_ratio = 0.0;
  for (std::size_t i = shifts.size(); i < shifts.size() + sdevs.size(); ++i)
    worst_sdev_ratio = std::max(worst_sdev_ratio, cases[i].ratio);
  report.assertions.push_back(check("sdev-ratios-strict", worst_sdev_ratio < 1.0,
                                    "max ratio over sdev family = " +
                                        format_double(worst_sdev_ratio)));

  report.assertions.push_back(
      check("no-inequality-violations", violations == 0,
            std::to_string(violations) + " of " + std::to_string(cases.size()) +
                " members violate w2^2 <= 2 kl + 1e-12"));

  // Closed-form spot values.
  const GaussianGap sharp = gaussian_w2_and_kl(GaussianParams({1.0}, {1.0}),
                                               GaussianParams::standard(1));
  const GaussianGap wide = gaussian_w2_and_kl(GaussianParams({0.0}, {2.0}),
                                              GaussianParams::standard(1));
  const double expected_two_kl = 3.0 - 2.0 * std::log(2.0);
  const bool spot_ok = std::abs(sharp.w2_squared - 1.0) <= 1e-12 &&
                       std::abs(sharp.kl - 0.5) <= 1e-12 &&
                       std::abs(wide.w2_squared - 1.0) <= 1e-12 &&
                       std::abs(2.0 * wide.kl - expected_two_kl) <= 1e-12;
  report.assertions.push_back(check(
      "closed-form-spot-values", spot_ok,
      "N(1,1) vs N(0,1): w2^2 = " + format_double(sharp.w2_squared) +
          ", kl = " + format_double(sharp.kl) + "; N(0,2) vs N(0,1): 2 kl = " +
          format_double(2.0 * wide.kl) + " (expected " +
          format_double(expected_two_kl) + ")"));

  CsvTable table;
  table.schema = "gaussian-cases.v1";
  table.columns = {"id", "tag", "dim", "w2_squared", "kl", "ratio", "mean_shift"};
  for (const TalagrandCase& c : cases) {
    table.rows.push_back({std::to_string(c.id), tags[c.id],
                          std::to_string(family[c.id].dim()),
                          format_double(c.w2_squared), format_double(c.kl),
                          format_double(c.ratio), c.mean_shift_only ? "1" : "0"});
  }
  write_csv(args.path_of("gaussian-cases.csv"), table);
  report.csv_paths.push_back("gaussian-cases.csv");

  nlohmann::json metrics;
  metrics["members"] = cases.size();
  metrics["max_ratio"] = max_ratio;
  metrics["violations"] = violations;
  metrics["spot"] = {{"sharp_w2", sharp.w2_squared},
                     {"sharp_kl", sharp.kl},
                     {"wide_two_kl", 2.0 * wide.kl},
                     {"wide_ratio", wide.w2_squared / (2.0 * wide.kl)}};
  report.metrics_json = metrics.dump();
  return report;
}

}  // namespace tci::detail
