#pragma once

#include <cstdint>
#include <random>

namespace tci {

/// Reproducible stream of standard normals. Each (seed, stream) pair selects
/// an independent substream: the engine is a std::mt19937_64 (whose output
/// sequence is fixed by the standard) seeded from both ids, and normals are
/// produced by an explicit Box-Muller transform, so the sequence depends only
/// on (seed, stream) -- never on the platform's distribution internals or on
/// how work is scheduled across threads.
class NormalStream {
public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);

  /// Standard normal deviate.
  double next();

  /// Uniform deviate in (0, 1].
  double next_uniform();

  /// Uniform deviate in [lo, hi).
  double next_uniform(double lo, double hi);

  /// Uniform integer in [0, n).
  std::uint64_t next_index(std::uint64_t n);

private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace tci
