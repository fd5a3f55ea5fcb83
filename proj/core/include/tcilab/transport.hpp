#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "tcilab/metric_space.hpp"

namespace tci {

/// A coupling of two discrete measures: nonnegative matrix whose row sums are
/// the source weights and whose column sums are the target weights.
struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // row-major rows x cols
  double cost_value = 0.0;     // sum_ij matrix_ij * dist(i,j)^2

  double at(std::size_t i, std::size_t j) const { return matrix[i * cols + j]; }
};

/// Kantorovich dual certificate for squared-distance cost: feasible pair
/// (g, h) with g[i] <= h[j] + dist(i,j)^2 for all i, j, whose value
/// nu(g) - mu(h) equals the optimal primal cost.
struct DualPotentials {
  std::vector<double> g;  // on the source (nu) side
  std::vector<double> h;  // on the target (mu) side
};

struct W2Result {
  double value = 0.0;  // squared quadratic Wasserstein distance
  TransportPlan plan;
  DualPotentials duals;
};

/// Exact squared quadratic Wasserstein distance between two measures on the
/// same space, solved as a linear program on the transportation polytope with
/// a primal network-simplex method (Bland's anti-cycling rule). The returned
/// plan satisfies the marginal constraints within 1e-9 and the dual pair
/// certifies optimality: nu(g) - mu(h) matches the primal value within 1e-9
/// (both checked before returning).
///
/// Throws std::runtime_error with diagnostics if the pivoting fails to
/// terminate within the iteration cap.
W2Result w2_squared_exact(const DiscreteMeasure& nu, const DiscreteMeasure& mu);

/// Entropy-regularized transport cost via log-domain Sinkhorn iterations.
/// The returned value is the squared-distance cost of a feasible plan (the
/// converged entropic plan rounded onto the transportation polytope), so it
/// is always an upper bound on w2_squared_exact. Iterations stop when the
/// pre-rounding marginal violation falls below tol (sup norm).
///
/// Throws std::runtime_error reporting the residual if the iteration does not
/// reach tol within max_iters.
double w2_squared_sinkhorn(const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                           double reg, int max_iters = 20000,
                           double tol = 1e-10);

/// Mix a family of measures through a transport plan: given one measure
/// per source/target pair (all on a single common space), returns
/// sum_ij plan_ij * per_pair[(i,j)]. Every pair carrying positive plan mass
/// must be present in the map.
DiscreteMeasure optimal_coupling_glue(
    const TransportPlan& plan,
    const std::map<std::pair<std::size_t, std::size_t>, DiscreteMeasure>& per_pair);

}  // namespace tci
