#include "tcilab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tci {

GaussianParams::GaussianParams(std::vector<double> mean_in,
                               std::vector<double> sdev_in)
    : mean(std::move(mean_in)), sdev(std::move(sdev_in)) {
  if (mean.size() != sdev.size())
    throw std::invalid_argument("GaussianParams: mean and sdev lengths differ");
  if (mean.empty())
    throw std::invalid_argument("GaussianParams: dimension must be positive");
  for (std::size_t k = 0; k < sdev.size(); ++k) {
    if (!std::isfinite(mean[k]) || !std::isfinite(sdev[k]) || sdev[k] <= 0.0)
      throw std::invalid_argument("GaussianParams: coordinate " + std::to_string(k) +
                                  " needs finite mean and positive sdev");
  }
}

GaussianParams GaussianParams::standard(std::size_t dim) {
  return GaussianParams(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

bool GaussianParams::mean_shift_of(const GaussianParams& mu) const {
  return sdev == mu.sdev;
}

GaussianGap gaussian_w2_and_kl(const GaussianParams& nu, const GaussianParams& mu) {
  if (nu.dim() != mu.dim())
    throw std::invalid_argument("gaussian_w2_and_kl: dimension mismatch");
  GaussianGap out;
  for (std::size_t k = 0; k < nu.dim(); ++k) {
    const double dm = nu.mean[k] - mu.mean[k];
    const double ds = nu.sdev[k] - mu.sdev[k];
    out.w2_squared += dm * dm + ds * ds;
    const double r = nu.sdev[k] / mu.sdev[k];
    // g(r) = (r^2 - 1)/2 - log r is nonnegative with g(1) = 0; the clamp
    // only absorbs rounding for r extremely close to (but not equal to) 1.
    const double g = std::max(0.0, (r * r - 1.0) / 2.0 - std::log(r));
    out.kl += g + dm * dm / (2.0 * mu.sdev[k] * mu.sdev[k]);
  }
  return out;
}

TalagrandReport talagrand_sweep(const GaussianParams& mu,
                                std::span<const GaussianParams> family) {
  TalagrandReport report;
  report.cases.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const GaussianGap gap = gaussian_w2_and_kl(family[i], mu);
    TalagrandCase c;
    c.id = i;
    c.w2_squared = gap.w2_squared;
    c.kl = gap.kl;
    c.mean_shift_only = family[i].mean_shift_of(mu);
    if (c.mean_shift_only) ++report.mean_shift_count;
    c.degenerate = (gap.kl == 0.0);
    if (!c.degenerate) {
      c.ratio = gap.w2_squared / (2.0 * gap.kl);
      report.max_ratio = std::max(report.max_ratio, c.ratio);
      if (c.mean_shift_only && std::abs(c.ratio - 1.0) > 1e-12)
        report.sharpness_violations.push_back(i);
    }
    if (gap.w2_squared > 2.0 * gap.kl + 1e-12) report.violations.push_back(i);
    report.cases.push_back(c);
  }
  return report;
}

}  // namespace tci
