#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tcilab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "tcilab — numerical checks for transport-entropy inequalities on path "
      "spaces"};
  app.footer(
      "Exit codes: 0 all checks passed, 1 at least one check failed, "
      "2 configuration error, 3 internal error.");
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  unsigned threads = 0;

  CLI::App* run_cmd = app.add_subcommand(
      "run", "Run the experiment described by a config file");
  run_cmd->add_option("config", config_path, "Config file (key = value lines)")
      ->required();
  run_cmd->add_option("--seed", seed_override,
                      "Seed override (takes precedence over the config file)");
  run_cmd->add_option("--out", out_override,
                      "Output directory override (default runs/<kind>)");
  run_cmd->add_option(
      "--threads", threads,
      "Worker threads; 0 = hardware concurrency. Affects speed only: "
      "numeric outputs are identical for every thread count");

  CLI::App* list_cmd =
      app.add_subcommand("list", "List experiment kinds and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  if (list_cmd->parsed()) {
    std::cout << tci::list_experiments();
    return 0;
  }

  try {
    const tci::ExperimentConfig config = tci::parse_config_file(config_path);
    tci::RunOptions options;
    options.seed_override = seed_override;
    options.out_dir_override = out_override;
    options.threads = threads;
    const tci::RunReport report = tci::run_experiment(config, options);

    std::cout << "kind: " << report.kind;
    if (report.has_seed) std::cout << "  seed: " << report.seed;
    std::cout << "  out: " << report.out_dir << "\n";
    std::size_t passed = 0;
    for (const tci::Assertion& a : report.assertions) {
      std::cout << (a.passed ? "[PASS] " : "[FAIL] ") << a.name << " — "
                << a.detail << "\n";
      if (a.passed) ++passed;
    }
    std::cout << passed << "/" << report.assertions.size()
              << " checks passed; summary: " << report.summary_path << "\n";
    return report.passed() ? 0 : 1;
  } catch (const tci::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
