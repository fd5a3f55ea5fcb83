#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "exp_shared.hpp"
#include "tcilab/markov.hpp"
#include "tcilab/rng.hpp"

namespace tci::detail {

namespace {

// Substream layout: tilts use stream ids [0, tilt_count), converse initial
// laws start at kConverseStream, mixture chains at kMixtureStream.
constexpr std::uint64_t kConverseStream = 1u << 20;
constexpr std::uint64_t kMixtureStream = 1u << 21;

MarkovChainSpec walk3_chain(int steps) {
  SpacePtr base = line_space({"a", "b", "c"}, {0.0, 1.0, 2.0});
  const std::vector<std::vector<double>> transition = {
      {0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}};
  const double third = 1.0 / 3.0;
  DiscreteMeasure initial(base, {third, third, third});
  return MarkovChainSpec(base, transition, steps, std::move(initial));
}

std::vector<double> random_simplex(NormalStream& rng, std::size_t n) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = rng.next_uniform();
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Entrywise gap between the path law of a random start and the mixture of
/// point-started path laws.
double mixture_gap(const MarkovChainSpec& spec, const PathSpace& ps) {
  const DiscreteMeasure mixed = path_law(spec, ps);
  std::vector<DiscreteMeasure> point_laws;
  for (std::size_t x = 0; x < spec.states(); ++x)
    point_laws.push_back(path_law(spec, ps, x));
  double gap = 0.0;
  for (std::size_t idx = 0; idx < ps.paths(); ++idx) {
    double acc = 0.0;
    for (std::size_t x = 0; x < spec.states(); ++x)
      acc += spec.initial().weight(x) * point_laws[x].weight(idx);
    gap = std::max(gap, std::abs(mixed.weight(idx) - acc));
  }
  return gap;
}

}  // namespace

RunReport run_markov_tci(const ExpArgs& args) {
  if (args.str("chain") != "walk3")
    throw ConfigError("parameter 'chain': only the walk3 preset is registered");
  const long long steps = args.integer("steps");
  const long long tilt_count = args.integer("tilt_count");
  const long long converse_count = args.integer("converse_count");
  const long long mixture_specs = args.integer("mixture_specs");
  const double beta_min = args.num("beta_min");
  const double beta_max = args.num("beta_max");
  if (steps < 1) throw ConfigError("parameter 'steps': must be at least 1");
  if (tilt_count < 1) throw ConfigError("parameter 'tilt_count': must be at least 1");
  if (converse_count < 1)
    throw ConfigError("parameter 'converse_count': must be at least 1");
  if (mixture_specs < 0)
    throw ConfigError("parameter 'mixture_specs': must be nonnegative");
  if (!(beta_min > 0.0) || !(beta_max >= beta_min))
    throw ConfigError("parameters 'beta_min'/'beta_max': need 0 < beta_min <= beta_max");
  if (static_cast<std::uint64_t>(tilt_count) >= kConverseStream ||
      static_cast<std::uint64_t>(converse_count) >=
          kMixtureStream - kConverseStream)
    throw ConfigError("family sizes exceed the reserved substream ranges");

  const MarkovChainSpec spec = walk3_chain(static_cast<int>(steps));
  const PathSpace ps(spec);

  // Exponential tilts of the path law: one substream per tilt, so the family
  // is independent of threading and of the other families.
  std::vector<TiltSpec> q_family(static_cast<std::size_t>(tilt_count));
  for (std::size_t t = 0; t < q_family.size(); ++t) {
    NormalStream rng(args.seed, t);
    q_family[t].potential.resize(ps.paths());
    for (double& v : q_family[t].potential) v = rng.next();
    q_family[t].beta = rng.next_uniform(beta_min, beta_max);
  }
  std::vector<DiscreteMeasure> nu_family;
  nu_family.reserve(static_cast<std::size_t>(converse_count));
  for (std::size_t k = 0; k < static_cast<std::size_t>(converse_count); ++k) {
    NormalStream rng(args.seed, kConverseStream + k);
    std::vector<double> potential(spec.states());
    for (double& v : potential) v = rng.next();
    const double beta = rng.next_uniform(beta_min, beta_max);
    nu_family.push_back(tilt_measure(spec.initial(), potential, beta));
  }

  // Constants: c2 exactly from the point-pair couplings; c0 and c1 as the
  // largest ratios over the tilt family, with c0 additionally covering the
  // converse initial laws so the converse inequality is checked with a
  // certified constant.
  const FellerEstimate feller = feller_lipschitz_c2(spec, ps);
  const FamilyConstants family =
      estimate_family_constants(spec, ps, q_family, nu_family, args.threads);
  if (!(family.c0 > 0.0) || !(family.c1 > 0.0))
    throw ConfigError(
        "the tilt family produced no admissible entropy ratios; enlarge "
        "tilt_count or the beta range");
  double c1 = family.c1;
  const bool c1_overridden = !args.str("c1_override").empty();
  if (c1_overridden) {
    c1 = args.num("c1_override");
    if (!(c1 > 0.0)) throw ConfigError("parameter 'c1_override': must be positive");
  }
  const TciConstants constants(family.c0, c1, feller.c2);

  const ForwardReport fwd =
      verify_theorem1_forward(spec, ps, constants, q_family, args.threads);
  const ConverseReport conv = verify_theorem1_converse(
      spec, ps, constants.composed_C, nu_family, args.threads);

  // Mixture identity on the preset chain plus randomly drawn chain specs.
  double mixture_err = mixture_gap(spec, ps);
  for (std::size_t i = 0; i < static_cast<std::size_t>(mixture_specs); ++i) {
    NormalStream rng(args.seed, kMixtureStream + i);
    const std::size_t states = 2 + static_cast<std::size_t>(rng.next_index(2));
    const int rand_steps = 2 + static_cast<int>(rng.next_index(2));
    std::vector<std::string> labels(states);
    std::vector<double> coords(states);
    for (std::size_t s = 0; s < states; ++s) {
      labels[s] = "s" + std::to_string(s);
      coords[s] = static_cast<double>(s);
    }
    SpacePtr base = line_space(std::move(labels), coords);
    std::vector<std::vector<double>> transition(states);
    for (auto& row : transition) row = random_simplex(rng, states);
    DiscreteMeasure initial(base, random_simplex(rng, states));
    const MarkovChainSpec random_spec(base, transition, rand_steps,
                                      std::move(initial));
    const PathSpace random_ps(random_spec);
    mixture_err = std::max(mixture_err, mixture_gap(random_spec, random_ps));
  }

  RunReport report;
  {
    std::string detail = std::to_string(fwd.precondition_violations.size()) +
                         " hypothesis violations (c0 = " + format_double(constants.c0) +
                         ", c1 = " + format_double(constants.c1) + ")";
    if (!fwd.precondition_violations.empty()) {
      const PreconditionViolation& v = fwd.precondition_violations.front();
      detail += "; first: tilt " + std::to_string(v.tilt_id) +
                (v.on_state ? " state '" + v.state_label + "'"
                            : std::string(" initial law")) +
                " lhs " + format_double(v.lhs) + " > bound " + format_double(v.bound);
    }
    report.assertions.push_back(
        check("precondition-constants", fwd.precondition_violations.empty(), detail));
  }
  report.assertions.push_back(check(
      "forward-composed-bound", fwd.main_violations.empty(),
      std::to_string(fwd.main_violations.size()) + " violations over " +
          std::to_string(fwd.cases.size()) +
          " tilts; max lhs/rhs ratio = " + format_double(fwd.max_ratio) +
          " with C = " + format_double(constants.composed_C)));
  report.assertions.push_back(
      check("ee1-step", fwd.ee1_violations.empty(),
            std::to_string(fwd.ee1_violations.size()) +
                " violations of the conditional-transport step"));
  report.assertions.push_back(
      check("tm5-step", fwd.tm5_violations.empty(),
            std::to_string(fwd.tm5_violations.size()) +
                " violations of the initial-coupling step (c2 = " +
                format_double(constants.c2) + ")"));
  report.assertions.push_back(
      check("entropy-chain-identity", fwd.max_entropy_gap <= 1e-10,
            "max |total - initial - conditional| = " +
                format_double(fwd.max_entropy_gap)));
  report.assertions.push_back(
      check("converse-entropy-identity", conv.entropy_violations.empty(),
            "max |H(Q|P^mu) - H(nu|mu)| = " + format_double(conv.max_entropy_gap)));
  report.assertions.push_back(
      check("converse-projection", conv.projection_violations.empty(),
            std::to_string(conv.projection_violations.size()) +
                " cases with W2(nu,mu)^2 > W2T(Q,P^mu)^2 + 1e-9"));
  report.assertions.push_back(
      check("tm1-with-composed-constant", conv.tm1_violations.empty(),
            std::to_string(conv.tm1_violations.size()) + " violations over " +
                std::to_string(conv.cases.size()) + " initial laws"));
  report.assertions.push_back(check(
      "mixture-identity", mixture_err <= 1e-12,
      "max entrywise gap between the mixed path law and the point mixture = " +
          format_double(mixture_err) + " over " +
          std::to_string(1 + mixture_specs) + " chain specs"));

  CsvTable forward_csv;
  forward_csv.schema = "markov-forward.v1";
  forward_csv.columns = {"tilt_id", "skipped", "entropy", "entropy_initial",
                         "entropy_conditional", "entropy_gap", "lhs", "rhs",
                         "ratio", "ee1_lhs", "ee1_rhs", "tm5_lhs", "tm5_rhs"};
  for (const ForwardCase& c : fwd.cases) {
    forward_csv.rows.push_back(
        {std::to_string(c.tilt_id), c.skipped ? "1" : "0", format_double(c.entropy),
         format_double(c.entropy_initial), format_double(c.entropy_conditional),
         format_double(c.entropy_gap), format_double(c.lhs), format_double(c.rhs),
         format_double(c.ratio), format_double(c.ee1_lhs), format_double(c.ee1_rhs),
         format_double(c.tm5_lhs), format_double(c.tm5_rhs)});
  }
  write_csv(args.path_of("markov-forward.csv"), forward_csv);
  report.csv_paths.push_back("markov-forward.csv");

  CsvTable converse_csv;
  converse_csv.schema = "markov-converse.v1";
  converse_csv.columns = {"id", "h_nu", "h_q", "w2_base", "w2_path", "bound"};
  for (const ConverseCase& c : conv.cases) {
    converse_csv.rows.push_back({std::to_string(c.id), format_double(c.h_nu),
                                 format_double(c.h_q), format_double(c.w2_base),
                                 format_double(c.w2_path), format_double(c.bound)});
  }
  write_csv(args.path_of("markov-converse.csv"), converse_csv);
  report.csv_paths.push_back("markov-converse.csv");

  nlohmann::json metrics;
  metrics["paths"] = ps.paths();
  metrics["c0"] = constants.c0;
  metrics["c1"] = constants.c1;
  metrics["c1_overridden"] = c1_overridden;
  metrics["c1_estimated"] = family.c1;
  metrics["c2"] = constants.c2;
  metrics["composed_C"] = constants.composed_C;
  metrics["c2_argmax"] = {spec.base()->label(feller.x), spec.base()->label(feller.y)};
  metrics["c1_argmax"] = {{"tilt", family.c1_argmax_tilt},
                          {"state", spec.base()->label(family.c1_argmax_state)}};
  metrics["c0_argmax"] =
      family.c0_argmax < q_family.size()
          ? "tilt-" + std::to_string(family.c0_argmax)
          : "converse-" + std::to_string(family.c0_argmax - q_family.size());
  metrics["max_forward_ratio"] = fwd.max_ratio;
  metrics["max_entropy_gap"] = fwd.max_entropy_gap;
  metrics["max_converse_entropy_gap"] = conv.max_entropy_gap;
  metrics["mixture_gap"] = mixture_err;
  report.metrics_json = metrics.dump();
  return report;
}

}  // namespace tci::detail
