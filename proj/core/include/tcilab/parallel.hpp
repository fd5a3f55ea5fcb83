#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace tci {

/// Number of worker threads to use: `requested` if positive, otherwise the
/// hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested);

/// Run body(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots; the partitioning is static, so any exception
/// from the body is rethrown after all workers join. With threads <= 1 the
/// loop runs inline.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Pairwise (binary-tree) summation: the result depends only on the order of
/// the input array, never on thread scheduling, and carries a smaller
/// rounding error than a naive left-to-right sum.
double pairwise_sum(std::span<const double> xs);

/// Sample mean and the 95% half-width 1.96 * sd / sqrt(n) of an array of
/// simulation outputs. n must be >= 2.
struct MeanSummary {
  double mean = 0.0;
  double half_width = 0.0;
  double sd = 0.0;
};
MeanSummary summarize_mean(std::span<const double> xs);

}  // namespace tci
