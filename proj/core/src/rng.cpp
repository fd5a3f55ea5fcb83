#include "tcilab/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tci {

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed & 0xffffffffu),
      static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream & 0xffffffffu),
      static_cast<std::uint32_t>(stream >> 32),
  };
  engine_.seed(seq);
}

double NormalStream::next_uniform() {
  // 53-bit mantissa in [0,1); map to (0,1] so log() is safe.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return 1.0 - u;
}

double NormalStream::next_uniform(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("next_uniform: empty interval");
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;  // [0,1)
  return lo + (hi - lo) * u;
}

std::uint64_t NormalStream::next_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_index: n must be positive");
  // Rejection sampling keeps the draw unbiased and platform-independent.
  const std::uint64_t limit = n * (UINT64_MAX / n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double NormalStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(angle);
  has_cached_ = true;
  return r * std::cos(angle);
}

}  // namespace tci
