#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcilab/report.hpp"

namespace tci {

/// Raised for every user-facing configuration problem (bad file, unknown
/// key, missing seed, malformed value). The runner maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One documented parameter of an experiment kind. A dynamic spec matches
/// the whole indexed family key.0, key.1, ... instead of a single key.
struct ParamSpec {
  std::string key;
  std::string default_value;
  std::string help;
  bool dynamic = false;
};

struct ExperimentKind {
  std::string name;
  std::string summary;
  bool needs_seed = true;
  std::vector<ParamSpec> params;
};

/// The five registered kinds, in a fixed order.
const std::vector<ExperimentKind>& experiment_catalog();

/// A parsed config file. Grammar (strict; unknown keys are errors):
///   # comment and blank lines are skipped
///   kind = <experiment kind>        (required, before [params])
///   seed = <uint64>                 (optional here; the CLI can supply it)
///   out_dir = <path>                (optional)
///   [params]                        (at most once)
///   <key> = <value>                 keys validated against the kind's list
struct ExperimentConfig {
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::map<std::string, std::string> params;
};

/// Parses config text; errors carry 1-based line numbers.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_dir_override;
  unsigned threads = 0;  // 0 = hardware concurrency; affects speed only
};

/// Validates the config, resolves defaults/overrides, runs the suite, and
/// writes the CSV files plus summary.json into the output directory.
/// Assertion failures are collected in the report, not thrown.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Catalog text for the `list` subcommand: each kind with its summary and
/// parameter schema.
std::string list_experiments();

}  // namespace tci
