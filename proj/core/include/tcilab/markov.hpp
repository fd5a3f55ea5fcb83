#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcilab/metric_space.hpp"

namespace tci {

/// A finite-state discrete-time Markov chain on a metric state space,
/// together with a number of steps and an initial law. The number of
/// enumerated paths, |states|^(steps+1), is capped at 100000.
class MarkovChainSpec {
public:
  MarkovChainSpec(SpacePtr base, std::vector<std::vector<double>> transition,
                  int steps, DiscreteMeasure initial);

  const SpacePtr& base() const { return base_; }
  std::size_t states() const { return base_->size(); }
  int steps() const { return steps_; }
  const DiscreteMeasure& initial() const { return initial_; }
  double trans(std::size_t from, std::size_t to) const {
    return transition_[from * base_->size() + to];
  }

private:
  SpacePtr base_;
  std::vector<double> transition_;  // row-stochastic, row-major
  int steps_ = 0;
  DiscreteMeasure initial_;
};

/// The path space of a chain: the product of steps+1 copies of the state
/// space under the max metric, with the index codec (row-major, the last
/// coordinate fastest; the initial state is the most significant digit).
class PathSpace {
public:
  explicit PathSpace(const MarkovChainSpec& spec);
  PathSpace(SpacePtr base, int steps);

  const SpacePtr& space() const { return space_; }
  const SpacePtr& base() const { return base_; }
  std::size_t paths() const { return space_->size(); }
  int steps() const { return steps_; }
  std::size_t states() const { return base_->size(); }

  std::size_t encode(std::span<const std::size_t> tuple) const;
  std::vector<std::size_t> decode(std::size_t index) const;
  std::size_t state_at(std::size_t index, int time) const;
  std::size_t initial_state(std::size_t index) const { return index / head_stride_; }

private:
  SpacePtr base_;
  SpacePtr space_;
  int steps_ = 0;
  std::size_t head_stride_ = 1;  // states^steps
};

/// Law of the chain on the path space: weight of (x_0..x_n) is
/// start(x_0) * prod_k transition(x_{k-1}, x_k).
DiscreteMeasure path_law(const MarkovChainSpec& spec, const PathSpace& ps);
DiscreteMeasure path_law(const MarkovChainSpec& spec, const PathSpace& ps,
                         std::size_t start_state);
DiscreteMeasure path_law(const MarkovChainSpec& spec, const PathSpace& ps,
                         const DiscreteMeasure& start);

/// A path measure split by its initial point: the initial marginal nu and,
/// for each state with nu(x) > 0, the renormalized conditional path law.
struct ConditionedPathLaw {
  DiscreteMeasure initial;
  std::map<std::size_t, DiscreteMeasure> conditionals;
};
ConditionedPathLaw condition_on_initial(const DiscreteMeasure& q,
                                        const MarkovChainSpec& spec,
                                        const PathSpace& ps);

/// Decomposition of H(Q | P^mu) by conditioning on the initial point:
///   total = H(nu | mu) + sum_x nu(x) H(Q_x | P^x).
/// When every term is finite the identity is enforced within 1e-10 (and
/// initial_part <= total); infinite entropy is flagged and the identity
/// skipped.
struct EntropyDecomposition {
  bool finite = false;
  double total = 0.0;
  double initial_part = 0.0;
  double conditional_part = 0.0;
  double gap = 0.0;  // |total - initial_part - conditional_part|
};
EntropyDecomposition entropy_chain_identity(const DiscreteMeasure& q,
                                            const MarkovChainSpec& spec,
                                            const PathSpace& ps);

/// Smallest constant that makes the point-to-point path coupling inequality
///   W_{2,T}(P^x, P^y)^2 <= c2 * dist(x,y)^2
/// tight over all state pairs, with the pair attaining it. Requires at least
/// two states. Always >= 1: any coupling pays dist(x,y) at time zero.
struct FellerEstimate {
  double c2 = 0.0;
  std::size_t x = 0, y = 0;
};
FellerEstimate feller_lipschitz_c2(const MarkovChainSpec& spec, const PathSpace& ps);

/// An exponential tilt of a base law: weights proportional to
/// base_i * exp(beta * potential_i).
struct TiltSpec {
  std::vector<double> potential;
  double beta = 0.0;
};

/// Largest ratio W2(tilt, base)^2 / H(tilt | base) over a tilt family; a
/// certified lower bound for any transportation-cost constant of base_law.
/// Tilts with H < 1e-12 are skipped; an empty admissible set yields 0.
double tci_constant_lower_bound(const DiscreteMeasure& base_law,
                                std::span<const TiltSpec> tilts);

/// Constants of the composed transportation-cost inequality:
///   C = (sqrt(c1) + sqrt(c0 * c2))^2,
/// where c0 governs the initial law, c1 the per-state path laws, and c2 the
/// point-to-point path coupling. By construction C >= c1 and C >= c0 * c2.
struct TciConstants {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, composed_C = 0.0;

  TciConstants(double c0_in, double c1_in, double c2_in);
};

/// Empirical constants extracted from a tilt family of the full path law:
/// c1 is the largest conditional ratio W_{2,T}(Q_x, P^x)^2 / H(Q_x | P^x)
/// over family members and states, c0 the largest initial-marginal ratio
/// W2(nu_Q, mu)^2 / H(nu_Q | mu) (optionally extended by extra initial laws).
/// Ratios with entropy < 1e-12 are skipped.
struct FamilyConstants {
  double c0 = 0.0, c1 = 0.0;
  std::size_t c0_argmax = 0, c1_argmax_tilt = 0, c1_argmax_state = 0;
};
FamilyConstants estimate_family_constants(
    const MarkovChainSpec& spec, const PathSpace& ps,
    std::span<const TiltSpec> q_family,
    std::span<const DiscreteMeasure> extra_initial_laws, unsigned threads = 0);

/// One verified tilt of the forward composition check.
struct ForwardCase {
  std::size_t tilt_id = 0;
  bool skipped = false;  // infinite entropy: the bound is vacuous
  double entropy = 0.0;
  double entropy_initial = 0.0;
  double entropy_conditional = 0.0;
  double entropy_gap = 0.0;
  double lhs = 0.0;      // W_{2,T}(Q, P^mu)^2
  double rhs = 0.0;      // composed_C * H(Q | P^mu)
  double ratio = 0.0;    // lhs / rhs (0 when rhs is 0)
  double ee1_lhs = 0.0;  // W_{2,T}(Q, P^nu)^2
  double ee1_rhs = 0.0;  // c1 * H(Q | P^mu)
  double tm5_lhs = 0.0;  // W_{2,T}(P^nu, P^mu)^2
  double tm5_rhs = 0.0;  // c2 * W2(nu, mu)^2
};

/// A hypothesis constant that fails on the family: the per-state constant c1
/// (state = the violating state) or the initial-law constant c0
/// (state_valid = false).
struct PreconditionViolation {
  std::size_t tilt_id = 0;
  bool on_state = false;
  std::size_t state = 0;
  std::string state_label;
  double lhs = 0.0, bound = 0.0;
};

struct ForwardReport {
  TciConstants constants;
  std::vector<ForwardCase> cases;
  std::vector<PreconditionViolation> precondition_violations;
  std::vector<std::size_t> main_violations;  // W_{2,T}(Q,P^mu)^2 > C H
  std::vector<std::size_t> ee1_violations;
  std::vector<std::size_t> tm5_violations;
  double max_ratio = 0.0;
  double max_entropy_gap = 0.0;

  bool passed() const {
    return precondition_violations.empty() && main_violations.empty() &&
           ee1_violations.empty() && tm5_violations.empty();
  }
};

/// Forward composition check over a tilt family of P^mu. For each tilt Q the
/// hypotheses are validated first (every conditional Q_x against c1, the
/// initial marginal against c0 -- failures are reported with the violating
/// tilt and state); then the composed bound and both intermediate steps
///   W_{2,T}(Q, P^nu)^2 <= c1 H(Q | P^mu)
///   W_{2,T}(P^nu, P^mu)^2 <= c2 W2(nu, mu)^2
/// are evaluated exactly.
ForwardReport verify_theorem1_forward(const MarkovChainSpec& spec,
                                      const PathSpace& ps,
                                      const TciConstants& constants,
                                      std::span<const TiltSpec> q_family,
                                      unsigned threads = 0);

struct ConverseCase {
  std::size_t id = 0;
  double h_nu = 0.0;      // H(nu | mu)
  double h_q = 0.0;       // H(Q | P^mu) for Q = (p o u0) P^mu
  double w2_base = 0.0;   // W2(nu, mu)^2
  double w2_path = 0.0;   // W_{2,T}(Q, P^mu)^2
  double bound = 0.0;     // C * H(nu | mu)
};

struct ConverseReport {
  double C = 0.0;
  std::vector<ConverseCase> cases;
  std::vector<std::size_t> entropy_violations;     // |h_q - h_nu| > 1e-12
  std::vector<std::size_t> projection_violations;  // w2_base > w2_path + 1e-9
  std::vector<std::size_t> tm1_violations;         // w2_base > C h_nu
  double max_entropy_gap = 0.0;

  bool passed() const {
    return entropy_violations.empty() && projection_violations.empty() &&
           tm1_violations.empty();
  }
};

/// Converse check: each initial law nu (absolutely continuous w.r.t. mu)
/// is lifted to the path measure Q = (d nu/d mu)(xi_0) P^mu, for which
/// H(Q | P^mu) = H(nu | mu) exactly and W2(nu, mu) <= W_{2,T}(Q, P^mu) by
/// marginal projection; the initial-law inequality with constant C follows
/// and is checked directly.
ConverseReport verify_theorem1_converse(const MarkovChainSpec& spec,
                                        const PathSpace& ps, double C,
                                        std::span<const DiscreteMeasure> nu_family,
                                        unsigned threads = 0);

}  // namespace tci
