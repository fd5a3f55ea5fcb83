#include "tcilab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tcilab/parallel.hpp"
#include "tcilab/transport.hpp"

namespace tci {

namespace {

constexpr std::size_t kMaxPaths = 100000;
constexpr double kEntropyFloor = 1e-12;  // ratios below this entropy are skipped
constexpr double kRelSlack = 1e-9;       // fp slack for inequality checks
constexpr double kAbsSlack = 1e-12;

bool bound_holds(double lhs, double bound) {
  return lhs <= bound * (1.0 + kRelSlack) + kAbsSlack;
}

void check_compatible(const MarkovChainSpec& spec, const PathSpace& ps,
                      const char* who) {
  if (ps.base() != spec.base() || ps.steps() != spec.steps())
    throw std::invalid_argument(std::string(who) +
                                ": path space was built for a different chain");
}

}  // namespace

MarkovChainSpec::MarkovChainSpec(SpacePtr base,
                                 std::vector<std::vector<double>> transition,
                                 int steps, DiscreteMeasure initial)
    : base_(std::move(base)), steps_(steps), initial_(std::move(initial)) {
  if (!base_) throw std::invalid_argument("chain needs a state space");
  const std::size_t s = base_->size();
  if (steps_ < 1) throw std::invalid_argument("chain needs at least one step");
  if (initial_.size() != s)
    throw std::invalid_argument("initial law does not live on the state space");
  if (transition.size() != s)
    throw std::invalid_argument("transition matrix must be " + std::to_string(s) +
                                "x" + std::to_string(s));
  transition_.resize(s * s);
  for (std::size_t i = 0; i < s; ++i) {
    if (transition[i].size() != s)
      throw std::invalid_argument("transition row " + std::to_string(i) +
                                  " has wrong length");
    double row_sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      const double p = transition[i][j];
      if (!std::isfinite(p) || p < 0.0)
        throw std::invalid_argument("negative or non-finite transition probability at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      transition_[i * s + j] = p;
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw std::invalid_argument("transition row " + std::to_string(i) +
                                  " sums to " + std::to_string(row_sum) +
                                  ", expected 1 within 1e-12");
  }
  // Enumeration guard: the path space must stay enumerable.
  std::size_t total = 1;
  for (int k = 0; k <= steps_; ++k) {
    if (total > kMaxPaths / s + 1) {
      total = kMaxPaths + 1;
      break;
    }
    total *= s;
  }
  if (total > kMaxPaths)
    throw std::invalid_argument("path space would exceed 100000 paths (" +
                                std::to_string(s) + "^" +
                                std::to_string(steps_ + 1) + ")");
}

PathSpace::PathSpace(const MarkovChainSpec& spec)
    : PathSpace(spec.base(), spec.steps()) {}

PathSpace::PathSpace(SpacePtr base, int steps) : base_(std::move(base)), steps_(steps) {
  if (!base_) throw std::invalid_argument("path space needs a base space");
  if (steps_ < 1) throw std::invalid_argument("path space needs at least one step");
  space_ = product_metric_max(base_, static_cast<std::size_t>(steps_) + 1);
  head_stride_ = 1;
  for (int k = 0; k < steps_; ++k) head_stride_ *= base_->size();
}

std::size_t PathSpace::encode(std::span<const std::size_t> tuple) const {
  if (tuple.size() != static_cast<std::size_t>(steps_) + 1)
    throw std::invalid_argument("encode: tuple length must be steps+1");
  std::size_t idx = 0;
  for (std::size_t v : tuple) {
    if (v >= base_->size()) throw std::invalid_argument("encode: state out of range");
    idx = idx * base_->size() + v;
  }
  return idx;
}

std::vector<std::size_t> PathSpace::decode(std::size_t index) const {
  if (index >= paths()) throw std::invalid_argument("decode: index out of range");
  std::vector<std::size_t> tuple(static_cast<std::size_t>(steps_) + 1);
  for (std::size_t k = tuple.size(); k-- > 0;) {
    tuple[k] = index % base_->size();
    index /= base_->size();
  }
  return tuple;
}

std::size_t PathSpace::state_at(std::size_t index, int time) const {
  if (time < 0 || time > steps_) throw std::invalid_argument("state_at: bad time");
  std::size_t stride = 1;
  for (int k = 0; k < steps_ - time; ++k) stride *= base_->size();
  return (index / stride) % base_->size();
}

namespace {

DiscreteMeasure path_law_impl(const MarkovChainSpec& spec, const PathSpace& ps,
                              const std::vector<double>& start) {
  check_compatible(spec, ps, "path_law");
  const std::size_t s = spec.states();
  const std::size_t total = ps.paths();
  std::vector<double> w(total, 0.0);
  std::vector<std::size_t> tuple(static_cast<std::size_t>(spec.steps()) + 1, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    // Decode incrementally (row-major order: the tail digit moves fastest).
    std::size_t rest = idx;
    for (std::size_t k = tuple.size(); k-- > 0;) {
      tuple[k] = rest % s;
      rest /= s;
    }
    double p = start[tuple[0]];
    for (std::size_t k = 1; k < tuple.size() && p != 0.0; ++k)
      p *= spec.trans(tuple[k - 1], tuple[k]);
    w[idx] = p;
  }
  return DiscreteMeasure(ps.space(), std::move(w));
}

}  // namespace

DiscreteMeasure path_law(const MarkovChainSpec& spec, const PathSpace& ps) {
  return path_law_impl(spec, ps, spec.initial().weights());
}

DiscreteMeasure path_law(const MarkovChainSpec& spec, const PathSpace& ps,
                         std::size_t start_state) {
  if (start_state >= spec.states())
    throw std::invalid_argument("path_law: start state out of range");
  std::vector<double> start(spec.states(), 0.0);
  start[start_state] = 1.0;
  return path_law_impl(spec, ps, start);
}

DiscreteMeasure path_law(const MarkovChainSpec& spec, const PathSpace& ps,
                         const DiscreteMeasure& start) {
  if (start.size() != spec.states())
    throw std::invalid_argument("path_law: start law does not live on the state space");
  return path_law_impl(spec, ps, start.weights());
}

ConditionedPathLaw condition_on_initial(const DiscreteMeasure& q,
                                        const MarkovChainSpec& spec,
                                        const PathSpace& ps) {
  check_compatible(spec, ps, "condition_on_initial");
  if (q.size() != ps.paths())
    throw std::invalid_argument("condition_on_initial: measure does not live on the path space");
  const std::size_t s = spec.states();
  std::vector<double> nu(s, 0.0);
  for (std::size_t idx = 0; idx < q.size(); ++idx)
    nu[ps.initial_state(idx)] += q.weight(idx);

  ConditionedPathLaw out{DiscreteMeasure(spec.base(), nu), {}};
  for (std::size_t x = 0; x < s; ++x) {
    if (nu[x] == 0.0) continue;
    std::vector<double> w(q.size(), 0.0);
    for (std::size_t idx = x * (q.size() / s); idx < (x + 1) * (q.size() / s); ++idx)
      w[idx] = q.weight(idx) / nu[x];
    out.conditionals.emplace(x, DiscreteMeasure(ps.space(), std::move(w)));
  }
  return out;
}

EntropyDecomposition entropy_chain_identity(const DiscreteMeasure& q,
                                            const MarkovChainSpec& spec,
                                            const PathSpace& ps) {
  check_compatible(spec, ps, "entropy_chain_identity");
  const DiscreteMeasure p_mu = path_law(spec, ps);
  const ConditionedPathLaw cond = condition_on_initial(q, spec, ps);

  EntropyDecomposition out;
  out.total = relative_entropy(q, p_mu);
  out.initial_part = relative_entropy(cond.initial, spec.initial());
  out.conditional_part = 0.0;
  for (const auto& [x, qx] : cond.conditionals) {
    const double hx = relative_entropy(qx, path_law(spec, ps, x));
    if (std::isinf(hx)) {
      out.conditional_part = std::numeric_limits<double>::infinity();
      break;
    }
    out.conditional_part += cond.initial.weight(x) * hx;
  }

  out.finite = std::isfinite(out.total) && std::isfinite(out.initial_part) &&
               std::isfinite(out.conditional_part);
  if (!out.finite) return out;

  out.gap = std::abs(out.total - out.initial_part - out.conditional_part);
  if (out.gap > 1e-10)
    throw std::logic_error("entropy chain identity violated: gap " +
                           std::to_string(out.gap));
  if (out.initial_part > out.total + 1e-10)
    throw std::logic_error("entropy chain identity violated: initial part " +
                           std::to_string(out.initial_part) + " exceeds total " +
                           std::to_string(out.total));
  return out;
}

FellerEstimate feller_lipschitz_c2(const MarkovChainSpec& spec, const PathSpace& ps) {
  check_compatible(spec, ps, "feller_lipschitz_c2");
  const std::size_t s = spec.states();
  if (s < 2)
    throw std::invalid_argument("feller_lipschitz_c2: need at least two states");
  std::vector<DiscreteMeasure> point_laws;
  point_laws.reserve(s);
  for (std::size_t x = 0; x < s; ++x) point_laws.push_back(path_law(spec, ps, x));

  FellerEstimate best;
  for (std::size_t x = 0; x < s; ++x) {
    for (std::size_t y = x + 1; y < s; ++y) {
      const double d = spec.base()->dist(x, y);
      const double w2 = w2_squared_exact(point_laws[x], point_laws[y]).value;
      const double ratio = w2 / (d * d);
      if (ratio > best.c2) best = {ratio, x, y};
    }
  }
  return best;
}

double tci_constant_lower_bound(const DiscreteMeasure& base_law,
                                std::span<const TiltSpec> tilts) {
  double best = 0.0;
  for (const TiltSpec& t : tilts) {
    const DiscreteMeasure tilted = tilt_measure(base_law, t.potential, t.beta);
    const double h = relative_entropy(tilted, base_law);
    if (!(h >= kEntropyFloor)) continue;
    const double w2 = w2_squared_exact(tilted, base_law).value;
    best = std::max(best, w2 / h);
  }
  return best;
}

TciConstants::TciConstants(double c0_in, double c1_in, double c2_in)
    : c0(c0_in), c1(c1_in), c2(c2_in) {
  if (!(c0 > 0.0) || !(c1 > 0.0) || !(c2 > 0.0))
    throw std::invalid_argument("TciConstants: constants must be positive");
  const double root = std::sqrt(c1) + std::sqrt(c0 * c2);
  composed_C = root * root;
  if (composed_C < c1 * (1.0 - 1e-12) || composed_C < c0 * c2 * (1.0 - 1e-12))
    throw std::logic_error("TciConstants: composed constant lost dominance");
}

namespace {

// Everything the per-tilt analysis needs, computed once.
struct TiltAnalysis {
  DiscreteMeasure q;
  ConditionedPathLaw cond;
  EntropyDecomposition entropy;
  // Conditional entropies/transport per state with nu(x) > 0.
  std::vector<std::size_t> states;
  std::vector<double> h_cond, w2_cond;
  double h_nu = 0.0, w2_nu = 0.0;
};

TiltAnalysis analyze_tilt(const MarkovChainSpec& spec, const PathSpace& ps,
                          const DiscreteMeasure& p_mu,
                          const std::vector<DiscreteMeasure>& point_laws,
                          const TiltSpec& tilt) {
  DiscreteMeasure q = tilt_measure(p_mu, tilt.potential, tilt.beta);
  ConditionedPathLaw cond = condition_on_initial(q, spec, ps);
  EntropyDecomposition entropy = entropy_chain_identity(q, spec, ps);
  TiltAnalysis a{std::move(q), std::move(cond), entropy, {}, {}, {}};
  for (const auto& [x, qx] : a.cond.conditionals) {
    a.states.push_back(x);
    a.h_cond.push_back(relative_entropy(qx, point_laws[x]));
    a.w2_cond.push_back(w2_squared_exact(qx, point_laws[x]).value);
  }
  a.h_nu = relative_entropy(a.cond.initial, spec.initial());
  a.w2_nu = w2_squared_exact(a.cond.initial, spec.initial()).value;
  return a;
}

}  // namespace

FamilyConstants estimate_family_constants(
    const MarkovChainSpec& spec, const PathSpace& ps,
    std::span<const TiltSpec> q_family,
    std::span<const DiscreteMeasure> extra_initial_laws, unsigned threads) {
  check_compatible(spec, ps, "estimate_family_constants");
  const DiscreteMeasure p_mu = path_law(spec, ps);
  std::vector<DiscreteMeasure> point_laws;
  for (std::size_t x = 0; x < spec.states(); ++x)
    point_laws.push_back(path_law(spec, ps, x));

  struct Row {
    double c1 = 0.0;
    std::size_t c1_state = 0;
    double c0 = 0.0;
  };
  std::vector<Row> rows(q_family.size());
  parallel_for(q_family.size(), threads, [&](std::size_t t) {
    const TiltAnalysis a = analyze_tilt(spec, ps, p_mu, point_laws, q_family[t]);
    Row& r = rows[t];
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      if (!(a.h_cond[k] >= kEntropyFloor)) continue;
      const double ratio = a.w2_cond[k] / a.h_cond[k];
      if (ratio > r.c1) {
        r.c1 = ratio;
        r.c1_state = a.states[k];
      }
    }
    if (a.h_nu >= kEntropyFloor) r.c0 = a.w2_nu / a.h_nu;
  });

  FamilyConstants out;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].c1 > out.c1) {
      out.c1 = rows[t].c1;
      out.c1_argmax_tilt = t;
      out.c1_argmax_state = rows[t].c1_state;
    }
    if (rows[t].c0 > out.c0) {
      out.c0 = rows[t].c0;
      out.c0_argmax = t;
    }
  }
  for (std::size_t k = 0; k < extra_initial_laws.size(); ++k) {
    const DiscreteMeasure& nu = extra_initial_laws[k];
    const double h = relative_entropy(nu, spec.initial());
    if (!(h >= kEntropyFloor) || std::isinf(h)) continue;
    const double ratio = w2_squared_exact(nu, spec.initial()).value / h;
    if (ratio > out.c0) {
      out.c0 = ratio;
      out.c0_argmax = q_family.size() + k;
    }
  }
  return out;
}

ForwardReport verify_theorem1_forward(const MarkovChainSpec& spec,
                                      const PathSpace& ps,
                                      const TciConstants& constants,
                                      std::span<const TiltSpec> q_family,
                                      unsigned threads) {
  check_compatible(spec, ps, "verify_theorem1_forward");
  const DiscreteMeasure p_mu = path_law(spec, ps);
  std::vector<DiscreteMeasure> point_laws;
  for (std::size_t x = 0; x < spec.states(); ++x)
    point_laws.push_back(path_law(spec, ps, x));

  ForwardReport report{constants, {}, {}, {}, {}, {}, 0.0, 0.0};
  report.cases.resize(q_family.size());
  std::vector<std::vector<PreconditionViolation>> pre(q_family.size());

  parallel_for(q_family.size(), threads, [&](std::size_t t) {
    const TiltAnalysis a = analyze_tilt(spec, ps, p_mu, point_laws, q_family[t]);
    ForwardCase& c = report.cases[t];
    c.tilt_id = t;
    if (!a.entropy.finite) {
      c.skipped = true;
      c.entropy = std::numeric_limits<double>::infinity();
      return;
    }
    c.entropy = a.entropy.total;
    c.entropy_initial = a.entropy.initial_part;
    c.entropy_conditional = a.entropy.conditional_part;
    c.entropy_gap = a.entropy.gap;

    // Hypothesis validation on this family member.
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      if (!(a.h_cond[k] >= kEntropyFloor)) continue;
      const double bound = constants.c1 * a.h_cond[k];
      if (!bound_holds(a.w2_cond[k], bound))
        pre[t].push_back({t, true, a.states[k],
                          spec.base()->label(a.states[k]), a.w2_cond[k], bound});
    }
    if (a.h_nu >= kEntropyFloor) {
      const double bound = constants.c0 * a.h_nu;
      if (!bound_holds(a.w2_nu, bound))
        pre[t].push_back({t, false, 0, "", a.w2_nu, bound});
    }

    // Composed bound and both intermediate steps.
    c.lhs = w2_squared_exact(a.q, p_mu).value;
    c.rhs = constants.composed_C * a.entropy.total;
    const DiscreteMeasure p_nu = path_law(spec, ps, a.cond.initial);
    c.ee1_lhs = w2_squared_exact(a.q, p_nu).value;
    c.ee1_rhs = constants.c1 * a.entropy.total;
    c.tm5_lhs = w2_squared_exact(p_nu, p_mu).value;
    c.tm5_rhs = constants.c2 * a.w2_nu;
    c.ratio = (a.entropy.total >= 1e-14) ? c.lhs / c.rhs : 0.0;
  });

  for (std::size_t t = 0; t < q_family.size(); ++t) {
    for (auto& v : pre[t]) report.precondition_violations.push_back(std::move(v));
    const ForwardCase& c = report.cases[t];
    if (c.skipped) continue;
    if (!bound_holds(c.lhs, c.rhs)) report.main_violations.push_back(t);
    if (!bound_holds(c.ee1_lhs, c.ee1_rhs)) report.ee1_violations.push_back(t);
    if (!bound_holds(c.tm5_lhs, c.tm5_rhs)) report.tm5_violations.push_back(t);
    report.max_ratio = std::max(report.max_ratio, c.ratio);
    report.max_entropy_gap = std::max(report.max_entropy_gap, c.entropy_gap);
  }
  return report;
}

ConverseReport verify_theorem1_converse(const MarkovChainSpec& spec,
                                        const PathSpace& ps, double C,
                                        std::span<const DiscreteMeasure> nu_family,
                                        unsigned threads) {
  check_compatible(spec, ps, "verify_theorem1_converse");
  if (!(C > 0.0))
    throw std::invalid_argument("verify_theorem1_converse: constant must be positive");
  const DiscreteMeasure p_mu = path_law(spec, ps);
  const DiscreteMeasure& mu = spec.initial();

  ConverseReport report;
  report.C = C;
  report.cases.resize(nu_family.size());

  parallel_for(nu_family.size(), threads, [&](std::size_t k) {
    const DiscreteMeasure& nu = nu_family[k];
    if (nu.size() != spec.states())
      throw std::invalid_argument("verify_theorem1_converse: initial law of wrong size");
    std::vector<double> density(spec.states(), 0.0);
    for (std::size_t x = 0; x < spec.states(); ++x) {
      if (nu.weight(x) == 0.0) continue;
      if (mu.weight(x) == 0.0)
        throw std::invalid_argument(
            "verify_theorem1_converse: member " + std::to_string(k) +
            " is not absolutely continuous at state '" + spec.base()->label(x) + "'");
      density[x] = nu.weight(x) / mu.weight(x);
    }
    // Lift: reweight whole paths by the density of their initial point.
    std::vector<double> w(ps.paths());
    for (std::size_t idx = 0; idx < ps.paths(); ++idx)
      w[idx] = density[ps.initial_state(idx)] * p_mu.weight(idx);
    const DiscreteMeasure q(ps.space(), std::move(w));

    ConverseCase& c = report.cases[k];
    c.id = k;
    c.h_nu = relative_entropy(nu, mu);
    c.h_q = relative_entropy(q, p_mu);
    c.w2_base = w2_squared_exact(nu, mu).value;
    c.w2_path = w2_squared_exact(q, p_mu).value;
    c.bound = C * c.h_nu;
  });

  for (std::size_t k = 0; k < nu_family.size(); ++k) {
    const ConverseCase& c = report.cases[k];
    const double gap = std::abs(c.h_q - c.h_nu);
    report.max_entropy_gap = std::max(report.max_entropy_gap, gap);
    if (gap > 1e-12) report.entropy_violations.push_back(k);
    if (c.w2_base > c.w2_path + 1e-9) report.projection_violations.push_back(k);
    if (!bound_holds(c.w2_base, c.bound)) report.tm1_violations.push_back(k);
  }
  return report;
}

}  // namespace tci
