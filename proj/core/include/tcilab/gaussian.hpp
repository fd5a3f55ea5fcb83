#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tci {

/// A product Gaussian on R^d with independent coordinates, parameterized by
/// the mean and the per-axis standard deviation (all sdev entries > 0).
struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> sdev;

  GaussianParams(std::vector<double> mean_in, std::vector<double> sdev_in);
  static GaussianParams standard(std::size_t dim);

  std::size_t dim() const { return mean.size(); }
  /// True when the standard deviations agree with mu's coordinate-wise
  /// (exact equality): nu differs from mu by a pure mean shift.
  bool mean_shift_of(const GaussianParams& mu) const;
};

struct GaussianGap {
  double w2_squared = 0.0;  // squared quadratic Wasserstein distance
  double kl = 0.0;          // relative entropy H(nu | mu)
};

/// Closed forms for product Gaussians of equal dimension:
///   W2(nu, mu)^2 = sum_k (dm_k^2 + (s_nu - s_mu)_k^2)
///   H(nu | mu)   = sum_k [ g(r_k) + dm_k^2 / (2 s_mu,k^2) ],
/// with r_k = s_nu,k / s_mu,k and g(r) = (r^2 - 1)/2 - log r >= 0. The
/// entropy is summed in this rearranged form because g(1) evaluates to zero
/// exactly, so a pure mean shift yields w2_squared == 2 * kl bit-for-bit.
GaussianGap gaussian_w2_and_kl(const GaussianParams& nu, const GaussianParams& mu);

/// One family member of a sweep.
struct TalagrandCase {
  std::size_t id = 0;
  double w2_squared = 0.0;
  double kl = 0.0;
  double ratio = 0.0;           // w2_squared / (2 kl); 0 when degenerate
  bool mean_shift_only = false; // sdev(nu) == sdev(mu) coordinate-wise
  bool degenerate = false;      // kl == 0 (nu == mu): ratio not evaluated
};

struct TalagrandReport {
  std::vector<TalagrandCase> cases;
  std::vector<std::size_t> violations;            // w2^2 > 2 kl + 1e-12
  std::vector<std::size_t> sharpness_violations;  // mean shift, |ratio - 1| > 1e-12
  double max_ratio = 0.0;
  std::size_t mean_shift_count = 0;

  bool passed() const {
    return violations.empty() && sharpness_violations.empty();
  }
};

/// Check W2^2 <= 2 H against the closed forms on every pair (nu, mu). On the
/// pure-mean-shift subfamily the ratio W2^2 / (2 H) is additionally required
/// to equal 1 within 1e-12 (the constant 2 is sharp there); this assertion is
/// only meaningful when mu is standard. Members with kl == 0 are marked
/// degenerate and excluded from ratio statistics.
TalagrandReport talagrand_sweep(const GaussianParams& mu,
                                std::span<const GaussianParams> family);

}  // namespace tci
