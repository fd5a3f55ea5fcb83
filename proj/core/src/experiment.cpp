#include "tcilab/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "exp_shared.hpp"

namespace tci {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// True when `key` is `prefix.<digits>`.
bool is_indexed_key(const std::string& key, const std::string& prefix) {
  if (key.size() < prefix.size() + 2 || key.compare(0, prefix.size(), prefix) != 0 ||
      key[prefix.size()] != '.')
    return false;
  for (std::size_t i = prefix.size() + 1; i < key.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(key[i]))) return false;
  return true;
}

bool key_allowed(const ExperimentKind& kind, const std::string& key) {
  for (const ParamSpec& spec : kind.params) {
    if (spec.dynamic) {
      if (is_indexed_key(key, spec.key)) return true;
    } else if (spec.key == key) {
      return true;
    }
  }
  return false;
}

const ExperimentKind* find_kind(const std::string& name) {
  for (const ExperimentKind& kind : experiment_catalog())
    if (kind.name == name) return &kind;
  return nullptr;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t pos = text.find(sep, begin);
    if (pos == std::string::npos) {
      out.push_back(trim(text.substr(begin)));
      return out;
    }
    out.push_back(trim(text.substr(begin, pos - begin)));
    begin = pos + 1;
  }
}

}  // namespace

const std::vector<ExperimentKind>& experiment_catalog() {
  static const std::vector<ExperimentKind> catalog = {
      {"gaussian-t2",
       "Closed-form check that the quadratic transportation cost between "
       "product Gaussians is bounded by twice the relative entropy, with the "
       "constant attained exactly on mean shifts of the standard Gaussian.",
       true,
       {{"random_members", "500",
         "randomly drawn comparison Gaussians (means in [-3,3], sdevs in "
         "[0.25,4], dimension up to 8)",
         false}}},
      {"heat-kernel",
       "Dirichlet heat kernel on the unit interval: the time-integrated "
       "squared L2 norm stays below sqrt(2t/pi), the semigroup damps sine "
       "modes at the spectral rate, and the kernel reproduces itself under "
       "composition of times (checked by quadrature).",
       false,
       {{"t_grid", "0.01,0.05,0.1,0.5,1", "times at which the L2 bound is checked",
         false},
        {"x_count", "101", "uniform spatial sample points in [0,1]", false}}},
      {"markov-tci",
       "Exact finite-state verification that transportation-cost inequalities "
       "compose on the path space of a Markov chain with a random initial "
       "state: an initial-law constant c0, a per-state path constant c1 and a "
       "point-coupling constant c2 yield the constant (sqrt(c1) + "
       "sqrt(c0*c2))^2 for the full path law, and conversely the initial-law "
       "inequality is recovered from the path-space one.",
       true,
       {{"chain", "walk3", "chain preset (walk3: reflecting 3-state walk, uniform start)",
         false},
        {"steps", "3", "number of transitions (path length minus one)", false},
        {"tilt_count", "1000", "exponential tilts of the path law in the forward sweep",
         false},
        {"converse_count", "200", "tilted initial laws in the converse sweep", false},
        {"beta_min", "0.25", "smallest tilt inverse temperature", false},
        {"beta_max", "2", "largest tilt inverse temperature", false},
        {"mixture_specs", "20", "random chain specs for the mixture identity check",
         false},
        {"c1_override", "",
         "override the per-state constant c1 (leave empty to estimate from the "
         "family; a tiny value forces precondition-violation reporting)",
         false}}},
      {"spde-coupling",
       "Monte Carlo verification, for a semi-implicit discretization of a "
       "reaction-diffusion equation with space-time white noise, that two "
       "solutions driven by the same noise stay close in mean-square sup "
       "distance: the ratio to the squared initial distance is bounded by one "
       "fitted constant across shapes and scalings, additive noise contracts, "
       "the zero-noise limit matches the spectral heat solution, and the "
       "recursion satisfies its own discrete Duhamel (mild) form.",
       true,
       {{"intervals", "64", "spatial intervals J (grid 0..J)", false},
        {"time_levels", "512", "time steps N (dt = horizon/N)", false},
        {"horizon", "0.25", "final time T", false},
        {"coeffs", "sin", "coefficient pair for the main scan (catalog name)", false},
        {"n_paths", "400", "Monte Carlo paths per pair", false},
        {"refine", "1", "1 = also report the scan at doubled resolution (not asserted)",
         false},
        {"pair", "sin:0.4 | zero;sin:0.2 | zero;sin:0.8 | zero;sin:1 | sin2:0.3;hat:1 | zero;sin:1 | sin:0.5",
         "initial-condition pairs pair.0, pair.1, ... as 'profile | profile' "
         "with profiles name[:amplitude] from zero, sin, sin2, sin3, hat, quad",
         true}}},
      {"spde-convolution",
       "Monte Carlo check of the discrete stochastic-convolution inequality: "
       "the running-sup second moment of the implicit-scheme convolution "
       "driven by a bounded forcing gamma(u) is bounded by eps times the "
       "forcing's running-sup moment plus a fitted constant times its time "
       "integral; a constant forcing is compared against the exact discrete "
       "isometry and the kernel L2 integral.",
       true,
       {{"intervals", "64", "spatial intervals J", false},
        {"time_levels", "512", "time steps N (dt = horizon/N)", false},
        {"horizon", "0.25", "final time T", false},
        {"coeffs", "sin", "coefficient pair driving the underlying field u", false},
        {"gamma", "sin", "forcing coefficient (zero, one, sin)", false},
        {"eps", "auto",
         "eps in the inequality; auto = 1/(6 K^2) with K the catalog Lipschitz "
         "constant",
         false},
        {"n_paths", "400", "Monte Carlo paths", false},
        {"f0", "sin:1", "initial profile of the underlying field", false}}}};
  return catalog;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  const ExperimentKind* kind = nullptr;
  bool in_params = false;
  std::istringstream stream(text);
  std::string raw;
  std::size_t line_no = 0;
  const auto fail = [&line_no](const std::string& what) {
    throw ConfigError("config line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line == "[params]") {
      if (in_params) fail("duplicate [params] section");
      if (!kind) fail("kind must be set before [params]");
      in_params = true;
      continue;
    }
    if (line.front() == '[') fail("unknown section " + line);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (in_params) {
      if (!key_allowed(*kind, key))
        fail("unknown parameter '" + key + "' for kind " + config.kind);
      if (config.params.count(key)) fail("duplicate parameter '" + key + "'");
      config.params[key] = value;
      continue;
    }
    if (key == "kind") {
      if (kind) fail("duplicate kind");
      kind = find_kind(value);
      if (!kind) fail("unknown kind '" + value + "'");
      config.kind = value;
    } else if (key == "seed") {
      if (config.seed) fail("duplicate seed");
      try {
        // std::stoull accepts a leading minus sign (it wraps); forbid it.
        if (value.empty() || !std::isdigit(static_cast<unsigned char>(value[0])))
          throw std::invalid_argument("");
        std::size_t used = 0;
        config.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail("seed must be an unsigned 64-bit integer, got '" + value + "'");
      }
    } else if (key == "out_dir") {
      if (config.out_dir) fail("duplicate out_dir");
      if (value.empty()) fail("out_dir must not be empty");
      config.out_dir = value;
    } else {
      fail("unknown key '" + key + "' (expected kind, seed, out_dir, or [params])");
    }
  }
  if (!kind) throw ConfigError("config: missing required key 'kind'");
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

RunReport dispatch(const std::string& kind, const detail::ExpArgs& args) {
  if (kind == "gaussian-t2") return detail::run_gaussian_t2(args);
  if (kind == "heat-kernel") return detail::run_heat_kernel(args);
  if (kind == "markov-tci") return detail::run_markov_tci(args);
  if (kind == "spde-coupling") return detail::run_spde_coupling(args);
  if (kind == "spde-convolution") return detail::run_spde_convolution(args);
  throw ConfigError("unknown experiment kind '" + kind + "'");
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const ExperimentKind* kind = find_kind(config.kind);
  if (!kind) throw ConfigError("unknown experiment kind '" + config.kind + "'");

  detail::ExpArgs args;
  for (const ParamSpec& spec : kind->params) {
    if (spec.dynamic) {
      const bool user_supplied =
          std::any_of(config.params.begin(), config.params.end(),
                      [&spec](const auto& kv) {
                        return is_indexed_key(kv.first, spec.key);
                      });
      if (!user_supplied && !spec.default_value.empty()) {
        const std::vector<std::string> defaults = split(spec.default_value, ';');
        for (std::size_t i = 0; i < defaults.size(); ++i)
          args.params[spec.key + "." + std::to_string(i)] = defaults[i];
      }
    } else {
      args.params[spec.key] = spec.default_value;
    }
  }
  for (const auto& [key, value] : config.params) {
    if (!key_allowed(*kind, key))
      throw ConfigError("unknown parameter '" + key + "' for kind " + kind->name);
    args.params[key] = value;
  }
  // Indexed families must be contiguous from 0.
  for (const ParamSpec& spec : kind->params) {
    if (!spec.dynamic) continue;
    std::vector<std::size_t> indices;
    for (const auto& [key, value] : args.params)
      if (is_indexed_key(key, spec.key))
        indices.push_back(std::stoull(key.substr(spec.key.size() + 1)));
    std::sort(indices.begin(), indices.end());
    for (std::size_t i = 0; i < indices.size(); ++i)
      if (indices[i] != i)
        throw ConfigError("parameter family '" + spec.key +
                          ".*' must be indexed contiguously from 0");
  }

  bool have_seed = false;
  if (options.seed_override) {
    args.seed = *options.seed_override;
    have_seed = true;
  } else if (config.seed) {
    args.seed = *config.seed;
    have_seed = true;
  }
  if (kind->needs_seed && !have_seed)
    throw ConfigError("kind " + kind->name +
                      " requires a seed (config key 'seed' or --seed)");

  args.out_dir = options.out_dir_override.value_or(
      config.out_dir.value_or("runs/" + kind->name));
  std::filesystem::create_directories(args.out_dir);
  args.threads = options.threads;

  const auto start = std::chrono::steady_clock::now();
  RunReport report = dispatch(kind->name, args);
  report.kind = kind->name;
  report.has_seed = kind->needs_seed;
  report.seed = args.seed;
  report.out_dir = args.out_dir;
  report.params.assign(args.params.begin(), args.params.end());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.summary_path = args.path_of("summary.json");
  atomic_write(report.summary_path, report_to_json(report));
  return report;
}

std::string list_experiments() {
  std::string out;
  for (const ExperimentKind& kind : experiment_catalog()) {
    out += kind.name + "\n  " + kind.summary + "\n";
    out += kind.needs_seed ? "  seed: required\n" : "  seed: not used\n";
    out += "  parameters:\n";
    for (const ParamSpec& spec : kind.params) {
      const std::string shown_key = spec.dynamic ? spec.key + ".<n>" : spec.key;
      out += "    " + shown_key;
      if (!spec.default_value.empty())
        out += " (default: " + spec.default_value + ")";
      out += "\n        " + spec.help + "\n";
    }
    out += "\n";
  }
  return out;
}

namespace detail {

const std::string& ExpArgs::str(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end())
    throw ConfigError("missing parameter '" + key + "'");
  return it->second;
}

double ExpArgs::num(const std::string& key) const {
  const std::string& value = str(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': expected a finite number, got '" +
                      value + "'");
  }
}

long long ExpArgs::integer(const std::string& key) const {
  const std::string& value = str(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': expected an integer, got '" + value +
                      "'");
  }
}

std::vector<double> ExpArgs::num_list(const std::string& key) const {
  const std::string& value = str(key);
  std::vector<double> out;
  for (const std::string& item : split(value, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("parameter '" + key + "': bad list entry '" + item + "'");
    }
  }
  if (out.empty())
    throw ConfigError("parameter '" + key + "': the list must not be empty");
  return out;
}

std::vector<std::string> ExpArgs::family(const std::string& prefix) const {
  std::vector<std::pair<std::size_t, std::string>> indexed;
  for (const auto& [key, value] : params)
    if (is_indexed_key(key, prefix))
      indexed.emplace_back(std::stoull(key.substr(prefix.size() + 1)), value);
  std::sort(indexed.begin(), indexed.end());
  std::vector<std::string> out;
  out.reserve(indexed.size());
  for (auto& [index, value] : indexed) out.push_back(std::move(value));
  return out;
}

Assertion check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

}  // namespace detail

}  // namespace tci
