#include "tcilab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tci {

namespace {

struct Cell {
  std::size_t i, j;
  double value;
};

// Primal transportation simplex on the support of both marginals.
// The basis is a spanning tree of the bipartite row/column graph; entering
// and leaving variables follow Bland's rule so degenerate pivots cannot
// cycle.
class TransportSimplex {
public:
  TransportSimplex(std::vector<double> a, std::vector<double> b,
                   const std::vector<double>& cost, std::size_t m, std::size_t n)
      : a_(std::move(a)), b_(std::move(b)), cost_(cost), m_(m), n_(n) {
    double max_c = 0.0;
    for (double c : cost_) max_c = std::max(max_c, c);
    pivot_tol_ = 1e-12 * (1.0 + max_c);
    in_basis_.assign(m_ * n_, 0);
    northwest_corner();
  }

  void solve() {
    const std::size_t max_iters = 200 * (m_ + n_) * (m_ + n_) + 10000;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
      compute_duals();
      std::size_t ei = 0, ej = 0;
      if (!find_entering(ei, ej)) return;  // optimal
      pivot(ei, ej);
    }
    throw std::runtime_error(
        "transport simplex did not terminate within " +
        std::to_string(max_iters) + " pivots on a " + std::to_string(m_) + "x" +
        std::to_string(n_) + " instance (pivot tolerance " +
        std::to_string(pivot_tol_) + ")");
  }

  const std::vector<Cell>& basis() const { return basis_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }

private:
  double cost_at(std::size_t i, std::size_t j) const { return cost_[i * n_ + j]; }

  // Northwest-corner start: advances exactly one index per step, so it always
  // yields the m + n - 1 basic cells of a spanning tree (degenerate zero
  // cells included).
  void northwest_corner() {
    std::vector<double> ra = a_, rb = b_;
    std::size_t i = 0, j = 0;
    while (true) {
      const double q = std::min(ra[i], rb[j]);
      basis_.push_back({i, j, q});
      in_basis_[i * n_ + j] = 1;
      ra[i] -= q;
      rb[j] -= q;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (i + 1 < m_ && (ra[i] == 0.0 || j + 1 == n_))
        ++i;
      else
        ++j;
    }
  }

  void compute_duals() {
    u_.assign(m_, std::numeric_limits<double>::quiet_NaN());
    v_.assign(n_, std::numeric_limits<double>::quiet_NaN());
    // Adjacency over basis cells.
    row_adj_.assign(m_, {});
    col_adj_.assign(n_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      row_adj_[basis_[k].i].push_back(k);
      col_adj_[basis_[k].j].push_back(k);
    }
    // Traverse the tree from row 0 (u_0 = 0).
    u_[0] = 0.0;
    std::vector<std::pair<bool, std::size_t>> stack;  // (is_row, node)
    stack.emplace_back(true, 0);
    while (!stack.empty()) {
      auto [is_row, node] = stack.back();
      stack.pop_back();
      if (is_row) {
        for (std::size_t k : row_adj_[node]) {
          const Cell& c = basis_[k];
          if (std::isnan(v_[c.j])) {
            v_[c.j] = cost_at(c.i, c.j) - u_[c.i];
            stack.emplace_back(false, c.j);
          }
        }
      } else {
        for (std::size_t k : col_adj_[node]) {
          const Cell& c = basis_[k];
          if (std::isnan(u_[c.i])) {
            u_[c.i] = cost_at(c.i, c.j) - v_[c.j];
            stack.emplace_back(true, c.i);
          }
        }
      }
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (std::isnan(u_[i]))
        throw std::runtime_error("transport simplex: basis tree disconnected at row " +
                                 std::to_string(i));
    for (std::size_t j = 0; j < n_; ++j)
      if (std::isnan(v_[j]))
        throw std::runtime_error("transport simplex: basis tree disconnected at column " +
                                 std::to_string(j));
  }

  // Bland's rule: first cell in row-major order with a negative reduced cost.
  bool find_entering(std::size_t& ei, std::size_t& ej) const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (in_basis_[i * n_ + j]) continue;
        if (cost_at(i, j) - u_[i] - v_[j] < -pivot_tol_) {
          ei = i;
          ej = j;
          return true;
        }
      }
    }
    return false;
  }

  void pivot(std::size_t ei, std::size_t ej) {
    // The unique tree path from row node ei to column node ej; appending the
    // entering edge closes the cycle.
    const std::size_t row_base = 0, col_base = m_;
    std::vector<int> parent_edge(m_ + n_, -1);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack = {row_base + ei};
    seen[ei] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == col_base + ej) break;
      const bool is_row = node < col_base;
      const auto& adj = is_row ? row_adj_[node] : col_adj_[node - col_base];
      for (std::size_t k : adj) {
        const Cell& c = basis_[k];
        const std::size_t other = is_row ? col_base + c.j : c.i;
        if (!seen[other]) {
          seen[other] = 1;
          parent_edge[other] = static_cast<int>(k);
          stack.push_back(other);
        }
      }
    }
    if (!seen[col_base + ej])
      throw std::runtime_error("transport simplex: no cycle for entering cell (" +
                               std::to_string(ei) + "," + std::to_string(ej) + ")");

    // Walk back from the column node to the row node collecting the path.
    std::vector<std::size_t> path;  // basis indices, from the ej end backwards
    std::size_t node = col_base + ej;
    while (node != row_base + ei) {
      const int k = parent_edge[node];
      if (k < 0)
        throw std::runtime_error("transport simplex: broken path reconstruction");
      path.push_back(static_cast<std::size_t>(k));
      const Cell& c = basis_[static_cast<std::size_t>(k)];
      node = (node >= col_base) ? row_base + c.i : col_base + c.j;
    }

    // Signs alternate around the cycle starting with + on the entering cell.
    // path[0] shares column ej with the entering cell, so it gets -.
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t t = 0; t < path.size(); t += 2) {  // minus positions
      const Cell& c = basis_[path[t]];
      if (c.value < theta) {
        theta = c.value;
        leaving = static_cast<int>(path[t]);
      } else if (c.value == theta && leaving >= 0) {
        // Bland tie-break: smallest (i, j) leaves.
        const Cell& cur = basis_[static_cast<std::size_t>(leaving)];
        if (std::make_pair(c.i, c.j) < std::make_pair(cur.i, cur.j))
          leaving = static_cast<int>(path[t]);
      }
    }
    if (leaving < 0)
      throw std::runtime_error("transport simplex: unbounded pivot (no leaving cell)");

    for (std::size_t t = 0; t < path.size(); ++t) {
      Cell& c = basis_[path[t]];
      c.value += (t % 2 == 0) ? -theta : theta;
      if (c.value < 0.0) c.value = 0.0;  // clamp fp dust from the pivot step
    }

    const Cell gone = basis_[static_cast<std::size_t>(leaving)];
    in_basis_[gone.i * n_ + gone.j] = 0;
    basis_[static_cast<std::size_t>(leaving)] = {ei, ej, theta};
    in_basis_[ei * n_ + ej] = 1;
  }

  std::vector<double> a_, b_;
  const std::vector<double>& cost_;
  std::size_t m_, n_;
  double pivot_tol_;
  std::vector<Cell> basis_;
  std::vector<char> in_basis_;
  std::vector<double> u_, v_;
  std::vector<std::vector<std::size_t>> row_adj_, col_adj_;
};

void check_same_scale(const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                      const char* who) {
  if (!nu.space() || !mu.space() || nu.size() != mu.size())
    throw std::invalid_argument(std::string(who) +
                                ": measures live on spaces of different size");
}

std::vector<std::size_t> support(const DiscreteMeasure& m) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.weight(i) > 0.0) s.push_back(i);
  return s;
}

void validate_result(const W2Result& r, const DiscreteMeasure& nu,
                     const DiscreteMeasure& mu) {
  const FiniteMetricSpace& sp = *nu.space();
  const double tol = 1e-9 * (1.0 + sp.max_dist() * sp.max_dist());
  // Marginals.
  for (std::size_t i = 0; i < r.plan.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.plan.cols; ++j) s += r.plan.at(i, j);
    if (std::abs(s - nu.weight(i)) > 1e-9)
      throw std::runtime_error("transport plan row sum off by " +
                               std::to_string(s - nu.weight(i)) + " at row " +
                               std::to_string(i));
  }
  for (std::size_t j = 0; j < r.plan.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.plan.rows; ++i) s += r.plan.at(i, j);
    if (std::abs(s - mu.weight(j)) > 1e-9)
      throw std::runtime_error("transport plan column sum off by " +
                               std::to_string(s - mu.weight(j)) + " at column " +
                               std::to_string(j));
  }
  // Dual feasibility and strong duality.
  double dual_value = 0.0;
  for (std::size_t i = 0; i < r.plan.rows; ++i) dual_value += nu.weight(i) * r.duals.g[i];
  for (std::size_t j = 0; j < r.plan.cols; ++j) dual_value -= mu.weight(j) * r.duals.h[j];
  if (std::abs(dual_value - r.value) > tol)
    throw std::runtime_error("transport duality gap " +
                             std::to_string(dual_value - r.value) +
                             " exceeds tolerance");
  for (std::size_t i = 0; i < r.plan.rows; ++i) {
    for (std::size_t j = 0; j < r.plan.cols; ++j) {
      const double d = sp.dist(i, j);
      if (r.duals.g[i] > r.duals.h[j] + d * d + tol)
        throw std::runtime_error("infeasible dual pair at (" + std::to_string(i) +
                                 "," + std::to_string(j) + ")");
    }
  }
}

}  // namespace

W2Result w2_squared_exact(const DiscreteMeasure& nu, const DiscreteMeasure& mu) {
  check_same_scale(nu, mu, "w2_squared_exact");
  const FiniteMetricSpace& sp = *nu.space();
  const std::size_t full = nu.size();

  const std::vector<std::size_t> src = support(nu);
  const std::vector<std::size_t> tgt = support(mu);
  const std::size_t m = src.size(), n = tgt.size();

  std::vector<double> a(m), b(n), cost(m * n);
  for (std::size_t i = 0; i < m; ++i) a[i] = nu.weight(src[i]);
  for (std::size_t j = 0; j < n; ++j) b[j] = mu.weight(tgt[j]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = sp.dist(src[i], tgt[j]);
      cost[i * n + j] = d * d;
    }

  TransportSimplex simplex(a, b, cost, m, n);
  simplex.solve();

  W2Result out;
  out.plan.rows = full;
  out.plan.cols = full;
  out.plan.matrix.assign(full * full, 0.0);
  double value = 0.0;
  for (const Cell& c : simplex.basis()) {
    out.plan.matrix[src[c.i] * full + tgt[c.j]] = c.value;
    value += c.value * cost[c.i * n + c.j];
  }
  out.value = value;
  out.plan.cost_value = value;

  // Dual pair in the form g[i] <= h[j] + dist^2: g = u, h = -v on the
  // supports; off-support potentials are filled in feasibly (they carry no
  // mass, so the value is unaffected).
  out.duals.g.assign(full, 0.0);
  out.duals.h.assign(full, 0.0);
  std::vector<char> on_src(full, 0), on_tgt(full, 0);
  for (std::size_t i = 0; i < m; ++i) {
    out.duals.g[src[i]] = simplex.u()[i];
    on_src[src[i]] = 1;
  }
  for (std::size_t j = 0; j < n; ++j) {
    out.duals.h[tgt[j]] = -simplex.v()[j];
    on_tgt[tgt[j]] = 1;
  }
  for (std::size_t j = 0; j < full; ++j) {
    if (on_tgt[j]) continue;
    double h = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double d = sp.dist(src[i], j);
      h = std::max(h, out.duals.g[src[i]] - d * d);
    }
    out.duals.h[j] = h;
  }
  for (std::size_t i = 0; i < full; ++i) {
    if (on_src[i]) continue;
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < full; ++j) {
      const double d = sp.dist(i, j);
      g = std::min(g, out.duals.h[j] + d * d);
    }
    out.duals.g[i] = g;
  }

  validate_result(out, nu, mu);
  return out;
}

double w2_squared_sinkhorn(const DiscreteMeasure& nu, const DiscreteMeasure& mu,
                           double reg, int max_iters, double tol) {
  check_same_scale(nu, mu, "w2_squared_sinkhorn");
  if (!(reg > 0.0))
    throw std::invalid_argument("w2_squared_sinkhorn: reg must be positive");
  if (max_iters < 1)
    throw std::invalid_argument("w2_squared_sinkhorn: max_iters must be >= 1");
  const FiniteMetricSpace& sp = *nu.space();

  const std::vector<std::size_t> src = support(nu);
  const std::vector<std::size_t> tgt = support(mu);
  const std::size_t m = src.size(), n = tgt.size();

  std::vector<double> a(m), b(n), cost(m * n);
  for (std::size_t i = 0; i < m; ++i) a[i] = nu.weight(src[i]);
  for (std::size_t j = 0; j < n; ++j) b[j] = mu.weight(tgt[j]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = sp.dist(src[i], tgt[j]);
      cost[i * n + j] = d * d;
    }

  std::vector<double> f(m, 0.0), g(n, 0.0);
  auto logsumexp = [](const std::vector<double>& xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
  };

  std::vector<double> buf(std::max(m, n));
  std::vector<double> plan(m * n);
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;

  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      buf.assign(n, 0.0);
      for (std::size_t j = 0; j < n; ++j) buf[j] = (g[j] - cost[i * n + j]) / reg;
      f[i] = reg * std::log(a[i]) - reg * logsumexp(buf);
    }
    for (std::size_t j = 0; j < n; ++j) {
      buf.assign(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) buf[i] = (f[i] - cost[i * n + j]) / reg;
      g[j] = reg * std::log(b[j]) - reg * logsumexp(buf);
    }
    // After the g-update the column marginals are exact; measure the row
    // violation of the current plan.
    residual = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        plan[i * n + j] = std::exp((f[i] + g[j] - cost[i * n + j]) / reg);
        s += plan[i * n + j];
      }
      residual = std::max(residual, std::abs(s - a[i]));
    }
    if (residual < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("sinkhorn did not converge: marginal residual " +
                             std::to_string(residual) + " after " +
                             std::to_string(max_iters) + " iterations (tol " +
                             std::to_string(tol) + ")");

  // Round the entropic plan onto the transportation polytope so the returned
  // cost is that of an exactly feasible plan (hence >= the exact optimum).
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += plan[i * n + j];
    const double scale = (s > 0.0) ? std::min(1.0, a[i] / s) : 0.0;
    for (std::size_t j = 0; j < n; ++j) plan[i * n + j] *= scale;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += plan[i * n + j];
    const double scale = (s > 0.0) ? std::min(1.0, b[j] / s) : 0.0;
    for (std::size_t i = 0; i < m; ++i) plan[i * n + j] *= scale;
  }
  std::vector<double> da(m), db(n);
  double total_d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += plan[i * n + j];
    da[i] = a[i] - s;
    total_d += da[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += plan[i * n + j];
    db[j] = b[j] - s;
  }
  if (total_d > 0.0) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        plan[i * n + j] += da[i] * db[j] / total_d;
  }

  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) value += plan[i * n + j] * cost[i * n + j];
  return value;
}

DiscreteMeasure optimal_coupling_glue(
    const TransportPlan& plan,
    const std::map<std::pair<std::size_t, std::size_t>, DiscreteMeasure>& per_pair) {
  if (per_pair.empty())
    throw std::invalid_argument("optimal_coupling_glue: empty measure map");
  const DiscreteMeasure& first = per_pair.begin()->second;
  const std::size_t target_size = first.size();
  for (const auto& [key, meas] : per_pair)
    if (meas.size() != target_size)
      throw std::invalid_argument(
          "optimal_coupling_glue: pair (" + std::to_string(key.first) + "," +
          std::to_string(key.second) + ") lives on a space of different size");

  std::vector<double> w(target_size, 0.0);
  for (std::size_t i = 0; i < plan.rows; ++i) {
    for (std::size_t j = 0; j < plan.cols; ++j) {
      const double p = plan.at(i, j);
      if (p == 0.0) continue;
      auto it = per_pair.find({i, j});
      if (it == per_pair.end())
        throw std::invalid_argument("optimal_coupling_glue: no measure for pair (" +
                                    std::to_string(i) + "," + std::to_string(j) +
                                    ") carrying mass " + std::to_string(p));
      const DiscreteMeasure& meas = it->second;
      for (std::size_t k = 0; k < target_size; ++k) w[k] += p * meas.weight(k);
    }
  }
  return DiscreteMeasure(first.space(), std::move(w));
}

}  // namespace tci
