#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tcilab/markov.hpp"
#include "tcilab/metric_space.hpp"
#include "tcilab/rng.hpp"
#include "tcilab/transport.hpp"

using namespace tci;

namespace {

MarkovChainSpec two_state_chain(int steps) {
  SpacePtr base = line_space({"a", "b"}, {0.0, 1.0});
  return MarkovChainSpec(base, {{0.75, 0.25}, {0.4, 0.6}}, steps,
                         DiscreteMeasure(base, {0.3, 0.7}));
}

MarkovChainSpec walk3_chain(int steps) {
  SpacePtr base = line_space({"a", "b", "c"}, {0.0, 1.0, 2.0});
  const double third = 1.0 / 3.0;
  return MarkovChainSpec(base,
                         {{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}},
                         steps, DiscreteMeasure(base, {third, third, third}));
}

std::vector<TiltSpec> random_tilts(const PathSpace& ps, std::size_t count,
                                   std::uint64_t seed) {
  std::vector<TiltSpec> tilts(count);
  for (std::size_t t = 0; t < count; ++t) {
    NormalStream rng(seed, t);
    tilts[t].potential.resize(ps.paths());
    for (double& v : tilts[t].potential) v = rng.next();
    tilts[t].beta = rng.next_uniform(0.25, 2.0);
  }
  return tilts;
}

}  // namespace

TEST_CASE("path space codec round-trips") {
  MarkovChainSpec spec = walk3_chain(3);
  PathSpace ps(spec);
  CHECK(ps.paths() == 81);
  CHECK(ps.states() == 3);
  CHECK(ps.steps() == 3);
  for (std::size_t idx = 0; idx < ps.paths(); ++idx) {
    const std::vector<std::size_t> tuple = ps.decode(idx);
    CHECK(tuple.size() == 4);
    CHECK(ps.encode(tuple) == idx);
    CHECK(ps.initial_state(idx) == tuple[0]);
    for (int k = 0; k <= 3; ++k) CHECK(ps.state_at(idx, k) == tuple[k]);
  }
  // Row-major with the last coordinate fastest: path (1,0,2,1) has index
  // 1*27 + 0*9 + 2*3 + 1.
  CHECK(ps.encode(std::vector<std::size_t>{1, 0, 2, 1}) == 34);
}

TEST_CASE("path law enumerates products of transition weights") {
  MarkovChainSpec spec = two_state_chain(2);
  PathSpace ps(spec);
  DiscreteMeasure law = path_law(spec, ps);
  CHECK(law.size() == 8);
  double total = 0.0;
  for (std::size_t idx = 0; idx < 8; ++idx) {
    const auto t = ps.decode(idx);
    const double expected = spec.initial().weight(t[0]) *
                            spec.trans(t[0], t[1]) * spec.trans(t[1], t[2]);
    CHECK(law.weight(idx) == doctest::Approx(expected).epsilon(1e-15));
    total += law.weight(idx);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  // Point-start laws put all mass on the matching head block.
  DiscreteMeasure from_b = path_law(spec, ps, 1);
  for (std::size_t idx = 0; idx < 8; ++idx)
    if (ps.initial_state(idx) == 0) CHECK(from_b.weight(idx) == 0.0);
}

TEST_CASE("mixture identity holds exactly") {
  MarkovChainSpec spec = two_state_chain(3);
  PathSpace ps(spec);
  DiscreteMeasure mixed = path_law(spec, ps);
  DiscreteMeasure from_a = path_law(spec, ps, 0);
  DiscreteMeasure from_b = path_law(spec, ps, 1);
  for (std::size_t idx = 0; idx < ps.paths(); ++idx) {
    const double mix = spec.initial().weight(0) * from_a.weight(idx) +
                       spec.initial().weight(1) * from_b.weight(idx);
    CHECK(std::abs(mixed.weight(idx) - mix) <= 1e-12);
  }
}

TEST_CASE("conditioning on the initial point is Bayes division") {
  MarkovChainSpec spec = two_state_chain(2);
  PathSpace ps(spec);
  DiscreteMeasure law = path_law(spec, ps);
  ConditionedPathLaw split = condition_on_initial(law, spec, ps);

  CHECK(split.initial.weight(0) == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(split.initial.weight(1) == doctest::Approx(0.7).epsilon(1e-13));
  // The conditional of the chain's own law given x0 = x is the point-start
  // law.
  for (std::size_t x = 0; x < 2; ++x) {
    const DiscreteMeasure& cond = split.conditionals.at(x);
    DiscreteMeasure point = path_law(spec, ps, x);
    for (std::size_t idx = 0; idx < ps.paths(); ++idx)
      CHECK(std::abs(cond.weight(idx) - point.weight(idx)) <= 1e-13);
  }
}

TEST_CASE("entropy chain identity for tilted laws") {
  MarkovChainSpec spec = walk3_chain(2);
  PathSpace ps(spec);
  DiscreteMeasure law = path_law(spec, ps);
  NormalStream rng(99, 0);
  std::vector<double> phi(ps.paths());
  for (double& v : phi) v = rng.next();
  DiscreteMeasure q = tilt_measure(law, phi, 1.3);

  EntropyDecomposition dec = entropy_chain_identity(q, spec, ps);
  CHECK(dec.finite);
  CHECK(dec.total > 0.0);
  CHECK(dec.gap <= 1e-10);
  CHECK(dec.initial_part <= dec.total + 1e-10);
  CHECK(dec.total ==
        doctest::Approx(relative_entropy(q, law)).epsilon(1e-12));
}

TEST_CASE("entropy decomposition flags non-absolutely-continuous laws") {
  MarkovChainSpec spec = walk3_chain(1);
  PathSpace ps(spec);
  // walk3 forbids a -> c, so mass on that path breaks absolute continuity.
  std::vector<double> w(ps.paths(), 0.0);
  w[ps.encode(std::vector<std::size_t>{0, 2})] = 1.0;
  DiscreteMeasure q(ps.space(), std::move(w));
  EntropyDecomposition dec = entropy_chain_identity(q, spec, ps);
  CHECK_FALSE(dec.finite);
}

TEST_CASE("point-coupling constant is exactly one for IID rows") {
  SpacePtr base = line_space({"a", "b"}, {0.0, 1.0});
  // Both rows equal: after time zero the chains can be coupled perfectly.
  MarkovChainSpec spec(base, {{0.3, 0.7}, {0.3, 0.7}}, 2,
                       DiscreteMeasure(base, {0.5, 0.5}));
  PathSpace ps(spec);
  FellerEstimate est = feller_lipschitz_c2(spec, ps);
  CHECK(est.c2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("point-coupling constant is at least one and attained") {
  MarkovChainSpec spec = walk3_chain(2);
  PathSpace ps(spec);
  FellerEstimate est = feller_lipschitz_c2(spec, ps);
  CHECK(est.c2 >= 1.0 - 1e-12);
  CHECK(est.x != est.y);
  // The reported pair attains the constant.
  DiscreteMeasure px = path_law(spec, ps, est.x);
  DiscreteMeasure py = path_law(spec, ps, est.y);
  const double d = spec.base()->dist(est.x, est.y);
  CHECK(w2_squared_exact(px, py).value ==
        doctest::Approx(est.c2 * d * d).epsilon(1e-9));
}

TEST_CASE("composed constant formula and validation") {
  TciConstants c(2.0, 3.0, 4.0);
  const double expected =
      (std::sqrt(3.0) + std::sqrt(8.0)) * (std::sqrt(3.0) + std::sqrt(8.0));
  CHECK(c.composed_C == doctest::Approx(expected).epsilon(1e-15));
  CHECK(c.composed_C >= c.c1);
  CHECK(c.composed_C >= c.c0 * c.c2);
  CHECK_THROWS_AS(TciConstants(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TciConstants(1.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("forward verification passes with estimated constants") {
  MarkovChainSpec spec = walk3_chain(2);
  PathSpace ps(spec);
  std::vector<TiltSpec> tilts = random_tilts(ps, 40, 4242);

  FellerEstimate feller = feller_lipschitz_c2(spec, ps);
  FamilyConstants family = estimate_family_constants(spec, ps, tilts, {}, 1);
  CHECK(family.c0 > 0.0);
  CHECK(family.c1 > 0.0);
  TciConstants constants(family.c0, family.c1, feller.c2);

  ForwardReport report = verify_theorem1_forward(spec, ps, constants, tilts, 1);
  CHECK(report.passed());
  CHECK(report.cases.size() == tilts.size());
  CHECK(report.max_ratio <= 1.0 + 1e-9);
  CHECK(report.max_entropy_gap <= 1e-10);

  // Same inputs on several workers must give identical numbers.
  ForwardReport threaded = verify_theorem1_forward(spec, ps, constants, tilts, 4);
  CHECK(threaded.max_ratio == report.max_ratio);
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    CHECK(threaded.cases[i].lhs == report.cases[i].lhs);
    CHECK(threaded.cases[i].rhs == report.cases[i].rhs);
  }
}

TEST_CASE("undersized constants are reported as hypothesis violations") {
  MarkovChainSpec spec = walk3_chain(2);
  PathSpace ps(spec);
  std::vector<TiltSpec> tilts = random_tilts(ps, 25, 31337);

  FellerEstimate feller = feller_lipschitz_c2(spec, ps);
  FamilyConstants family = estimate_family_constants(spec, ps, tilts, {}, 1);
  // Halving c1 must break the per-state hypothesis on the argmax tilt.
  TciConstants weak(family.c0, family.c1 / 2.0, feller.c2);
  ForwardReport report = verify_theorem1_forward(spec, ps, weak, tilts, 1);
  CHECK_FALSE(report.precondition_violations.empty());
  bool found_state_violation = false;
  for (const PreconditionViolation& v : report.precondition_violations)
    if (v.on_state) {
      found_state_violation = true;
      CHECK_FALSE(v.state_label.empty());
      CHECK(v.lhs > v.bound);
    }
  CHECK(found_state_violation);
}

TEST_CASE("converse verification lifts initial laws to path measures") {
  MarkovChainSpec spec = walk3_chain(2);
  PathSpace ps(spec);
  std::vector<TiltSpec> tilts = random_tilts(ps, 30, 777);
  std::vector<DiscreteMeasure> nus;
  for (std::size_t k = 0; k < 12; ++k) {
    NormalStream rng(777, 5000 + k);
    std::vector<double> phi(spec.states());
    for (double& v : phi) v = rng.next();
    nus.push_back(tilt_measure(spec.initial(), phi, rng.next_uniform(0.25, 2.0)));
  }

  FellerEstimate feller = feller_lipschitz_c2(spec, ps);
  FamilyConstants family = estimate_family_constants(spec, ps, tilts, nus, 1);
  TciConstants constants(family.c0, family.c1, feller.c2);

  ConverseReport report =
      verify_theorem1_converse(spec, ps, constants.composed_C, nus, 1);
  CHECK(report.passed());
  CHECK(report.cases.size() == nus.size());
  CHECK(report.max_entropy_gap <= 1e-12);
  for (const ConverseCase& c : report.cases) {
    CHECK(c.w2_base <= c.w2_path + 1e-9);
    CHECK(std::abs(c.h_q - c.h_nu) <= 1e-12);
  }
}

TEST_CASE("converse rejects initial laws outside the support") {
  SpacePtr base = line_space({"a", "b", "c"}, {0.0, 1.0, 2.0});
  MarkovChainSpec spec(base,
                       {{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}}, 1,
                       DiscreteMeasure(base, {0.5, 0.5, 0.0}));
  PathSpace ps(spec);
  std::vector<DiscreteMeasure> bad = {
      DiscreteMeasure(base, {0.0, 0.0, 1.0})};  // mass where mu has none
  CHECK_THROWS_AS(verify_theorem1_converse(spec, ps, 10.0, bad, 1),
                  std::invalid_argument);
}

TEST_CASE("chain spec validation") {
  SpacePtr base = line_space({"a", "b"}, {0.0, 1.0});
  DiscreteMeasure init(base, {0.5, 0.5});
  CHECK_THROWS_AS(
      MarkovChainSpec(base, {{0.5, 0.4}, {0.5, 0.5}}, 1, init),
      std::invalid_argument);  // row does not sum to one
  CHECK_THROWS_AS(MarkovChainSpec(base, {{1.0, 0.0}}, 1, init),
                  std::invalid_argument);  // wrong row count
  CHECK_THROWS_AS(
      MarkovChainSpec(base, {{1.0, 0.0}, {0.0, 1.0}}, 20, init),
      std::invalid_argument);  // path count beyond the enumeration cap
}
