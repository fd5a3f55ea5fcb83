#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tcilab/experiment.hpp"

using namespace tci;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Strip run-site metadata (wall time, output location) so the comparison is
// about scientific content only.
std::string json_without_run_metadata(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  j.erase("timing");
  j.erase("out_dir");
  return j.dump(2);
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("exp-test-work") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("config grammar accepts the documented form") {
  const std::string text =
      "# demo configuration\n"
      "kind = gaussian-t2\n"
      "seed = 9\n"
      "out_dir = some/dir\n"
      "\n"
      "[params]\n"
      "random_members = 5\n";
  ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.kind == "gaussian-t2");
  REQUIRE(cfg.seed.has_value());
  CHECK(*cfg.seed == 9);
  REQUIRE(cfg.out_dir.has_value());
  CHECK(*cfg.out_dir == "some/dir");
  CHECK(cfg.params.at("random_members") == "5");
}

TEST_CASE("config grammar rejects malformed input with line numbers") {
  auto expect_error = [](const std::string& text, const std::string& fragment) {
    try {
      parse_config_text(text);
      FAIL_CHECK("expected ConfigError for: " << fragment);
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(contains(e.what(), fragment),
                    "message '" << e.what() << "' lacks '" << fragment << "'");
    }
  };

  expect_error("[params]\nkind = gaussian-t2\n", "line 1");  // params first
  expect_error("kind = no-such-kind\n", "no-such-kind");
  expect_error("kind = gaussian-t2\nkind = gaussian-t2\n", "line 2");
  expect_error("kind = gaussian-t2\nseed = -4\n", "seed");
  expect_error("kind = gaussian-t2\nseed = 12abc\n", "seed");
  expect_error("kind = gaussian-t2\n[params]\nbogus = 1\n", "line 3");
  expect_error("kind = gaussian-t2\n[params]\n[params]\n", "line 3");
  expect_error("kind = gaussian-t2\nrandom_members = 5\n", "line 2");
  expect_error("kind = gaussian-t2\n[params]\nnot a key value line\n", "line 3");
  expect_error("seed = 4\n", "kind");  // kind missing entirely
}

TEST_CASE("unknown parameters and missing seeds are configuration errors") {
  ExperimentConfig cfg;
  cfg.kind = "gaussian-t2";
  RunOptions opts;
  // gaussian-t2 needs a seed: neither the config nor the overrides give one.
  CHECK_THROWS_AS(run_experiment(cfg, opts), ConfigError);

  cfg.seed = 5;
  cfg.params["no_such_param"] = "1";
  CHECK_THROWS_AS(run_experiment(cfg, opts), ConfigError);
}

TEST_CASE("indexed families must be contiguous from zero") {
  ExperimentConfig cfg;
  cfg.kind = "spde-coupling";
  cfg.seed = 5;
  cfg.params["pair.0"] = "sin:1 | zero";
  cfg.params["pair.2"] = "sin:2 | zero";  // gap at pair.1
  RunOptions opts;
  CHECK_THROWS_AS(run_experiment(cfg, opts), ConfigError);
}

TEST_CASE("catalog listing names every kind with its parameters") {
  const std::string listing = list_experiments();
  for (const ExperimentKind& kind : experiment_catalog()) {
    CHECK(contains(listing, kind.name));
    for (const ParamSpec& p : kind.params) CHECK(contains(listing, p.key));
  }
  CHECK(experiment_catalog().size() == 5);
}

TEST_CASE("gaussian run writes summary and csv atomically") {
  const fs::path dir = fresh_dir("gaussian");
  ExperimentConfig cfg;
  cfg.kind = "gaussian-t2";
  cfg.seed = 11;
  cfg.params["random_members"] = "25";
  RunOptions opts;
  opts.out_dir_override = dir.string();

  RunReport report = run_experiment(cfg, opts);
  CHECK(report.passed());
  CHECK(report.kind == "gaussian-t2");
  CHECK(report.seed == 11);
  CHECK_FALSE(report.assertions.empty());

  const std::string csv = read_file(dir / "gaussian-cases.csv");
  CHECK(csv.rfind("#schema=gaussian-cases.v1\n", 0) == 0);

  const std::string summary = read_file(dir / "summary.json");
  nlohmann::json j = nlohmann::json::parse(summary);
  CHECK(j.at("kind") == "gaussian-t2");
  CHECK(j.at("seed") == 11);
  CHECK(j.at("passed") == true);
  CHECK(j.contains("timing"));
  CHECK(j.at("params").contains("random_members"));
  CHECK(j.at("metrics").is_object());
  // No leftover temporary from the atomic write.
  CHECK_FALSE(fs::exists(dir / "summary.json.tmp"));
}

TEST_CASE("heat kernel runs without a seed and omits it from the summary") {
  const fs::path dir = fresh_dir("heat");
  ExperimentConfig cfg;
  cfg.kind = "heat-kernel";
  cfg.params["x_count"] = "21";
  RunOptions opts;
  opts.out_dir_override = dir.string();

  RunReport report = run_experiment(cfg, opts);
  CHECK(report.passed());
  CHECK_FALSE(report.has_seed);
  nlohmann::json j = nlohmann::json::parse(read_file(dir / "summary.json"));
  CHECK_FALSE(j.contains("seed"));
}

TEST_CASE("runs are byte-identical across thread counts") {
  ExperimentConfig cfg;
  cfg.kind = "markov-tci";
  cfg.seed = 31;
  cfg.params["steps"] = "2";
  cfg.params["tilt_count"] = "40";
  cfg.params["converse_count"] = "15";
  cfg.params["mixture_specs"] = "3";

  const fs::path dir1 = fresh_dir("markov-t1");
  const fs::path dir4 = fresh_dir("markov-t4");
  RunOptions opts1;
  opts1.out_dir_override = dir1.string();
  opts1.threads = 1;
  RunOptions opts4;
  opts4.out_dir_override = dir4.string();
  opts4.threads = 4;

  RunReport r1 = run_experiment(cfg, opts1);
  RunReport r4 = run_experiment(cfg, opts4);
  CHECK(r1.passed());
  CHECK(r4.passed());

  for (const char* name : {"markov-forward.csv", "markov-converse.csv"})
    CHECK(read_file(dir1 / name) == read_file(dir4 / name));
  CHECK(json_without_run_metadata(read_file(dir1 / "summary.json")) ==
        json_without_run_metadata(read_file(dir4 / "summary.json")));
}

TEST_CASE("seed and output directory overrides take precedence") {
  const fs::path dir = fresh_dir("override");
  ExperimentConfig cfg;
  cfg.kind = "gaussian-t2";
  cfg.seed = 1;
  cfg.out_dir = (dir / "ignored").string();
  cfg.params["random_members"] = "5";
  RunOptions opts;
  opts.seed_override = 2;
  opts.out_dir_override = (dir / "used").string();

  RunReport report = run_experiment(cfg, opts);
  CHECK(report.seed == 2);
  CHECK(fs::exists(dir / "used" / "summary.json"));
  CHECK_FALSE(fs::exists(dir / "ignored"));
}
