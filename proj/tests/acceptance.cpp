// Acceptance gate: runs the full-scale checks end to end and prints one
// [PASS]/[FAIL] line per criterion. Exit code 0 iff every criterion passed.
//
// Usage: acceptance --cli <path-to-tcilab-binary> --work <scratch-dir>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "tcilab/experiment.hpp"
#include "tcilab/metric_space.hpp"
#include "tcilab/rng.hpp"
#include "tcilab/transport.hpp"

namespace fs = std::filesystem;
using namespace tci;

namespace {

struct Gate {
  int failures = 0;

  void line(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " — " << detail << "\n";
    if (!ok) ++failures;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

const Assertion* find_assertion(const RunReport& report, const std::string& name) {
  for (const Assertion& a : report.assertions)
    if (a.name == name) return &a;
  return nullptr;
}

/// All named assertions exist and passed; on failure the detail says which.
bool assertions_pass(const RunReport& report, const std::vector<std::string>& names,
                     std::string& why) {
  for (const std::string& name : names) {
    const Assertion* a = find_assertion(report, name);
    if (!a) {
      why = "missing check '" + name + "'";
      return false;
    }
    if (!a->passed) {
      why = "'" + name + "' failed: " + a->detail;
      return false;
    }
  }
  why = "all of:";
  for (const std::string& name : names) why += " " + name;
  return true;
}

RunReport run_kind(const std::string& kind, std::uint64_t seed,
                   const std::map<std::string, std::string>& params,
                   const fs::path& out_dir) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.seed = seed;
  cfg.params = params;
  RunOptions opts;
  opts.out_dir_override = out_dir.string();
  return run_experiment(cfg, opts);
}

int run_cli(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return "<unreadable:" + path.string() + ">";
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Strip run-site metadata (wall time, output location) so the comparison is
// about scientific content only.
std::string json_without_run_metadata(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) return "<unparsable>";
  j.erase("timing");
  j.erase("out_dir");
  return j.dump(2);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path work = "acceptance-work";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli")
      cli = argv[i + 1];
    else if (flag == "--work")
      work = argv[i + 1];
    else {
      std::cerr << "unknown flag " << flag << "\n";
      return 2;
    }
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  fs::create_directories(work);

  Gate gate;

  // ---- 1. Gaussian family: inequality plus sharpness on mean shifts. ----
  try {
    const RunReport r = run_kind("gaussian-t2", 20240816, {}, work / "gaussian");
    std::string why;
    const bool checks = assertions_pass(
        r,
        {"sharpness-mean-shift", "sdev-ratios-strict", "no-inequality-violations",
         "closed-form-spot-values"},
        why);
    const bool in_budget = r.wall_seconds < 1.0;
    gate.line("gaussian-sharpness", checks && in_budget,
              why + "; wall " + fmt(r.wall_seconds) + " s (budget 1 s)");
  } catch (const std::exception& e) {
    gate.line("gaussian-sharpness", false, std::string("exception: ") + e.what());
  }

  // ---- 2. Exact transport vs exhaustive search on uniform instances. ----
  try {
    NormalStream rng(90210, 0);
    double max_gap = 0.0, max_cert = 0.0;
    const int instances = 50;
    for (int trial = 0; trial < instances; ++trial) {
      const std::size_t atoms = 7;
      std::vector<double> px(atoms), py(atoms);
      for (std::size_t i = 0; i < atoms; ++i) {
        px[i] = rng.next_uniform(0.0, 4.0);
        py[i] = rng.next_uniform(0.0, 4.0);
      }
      std::vector<std::vector<double>> dist(atoms, std::vector<double>(atoms, 0.0));
      for (std::size_t i = 0; i < atoms; ++i)
        for (std::size_t j = 0; j < atoms; ++j)
          dist[i][j] = std::hypot(px[i] - px[j], py[i] - py[j]);
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < atoms; ++i)
        labels.push_back("p" + std::to_string(i));
      SpacePtr space = make_space(std::move(labels), std::move(dist));

      const std::size_t n = 2 + rng.next_index(5);  // 2..6 sample points
      std::vector<std::size_t> src(n), dst(n);
      for (std::size_t k = 0; k < n; ++k) {
        src[k] = rng.next_index(atoms);
        dst[k] = rng.next_index(atoms);
      }
      const DiscreteMeasure nu = empirical_measure(src, space);
      const DiscreteMeasure mu = empirical_measure(dst, space);
      const W2Result result = w2_squared_exact(nu, mu);
      const double brute = oracle::permutation_w2_squared(*space, src, dst);
      max_gap = std::max(max_gap, std::abs(result.value - brute));
      max_cert = std::max(max_cert, oracle::certificate_gaps(result, nu, mu).worst());
    }
    gate.line("transport-oracle-equivalence", max_gap <= 1e-9 && max_cert <= 1e-9,
              std::to_string(instances) + " uniform instances: max |lp - search| = " +
                  fmt(max_gap) + ", max certificate gap = " + fmt(max_cert) +
                  " (tolerance 1e-9)");
  } catch (const std::exception& e) {
    gate.line("transport-oracle-equivalence", false,
              std::string("exception: ") + e.what());
  }

  // ---- 3-6. Markov composition theorem at full scale (one shared run). ----
  try {
    const RunReport r = run_kind("markov-tci", 20240816, {}, work / "markov");
    std::string why;

    bool ok = assertions_pass(
        r, {"precondition-constants", "forward-composed-bound", "ee1-step", "tm5-step"},
        why);
    const bool in_budget = r.wall_seconds < 300.0;
    gate.line("markov-forward-composition", ok && in_budget,
              why + "; 1000 tilts on 81 paths; wall " + fmt(r.wall_seconds) +
                  " s (budget 300 s)");

    ok = assertions_pass(
        r,
        {"converse-entropy-identity", "converse-projection",
         "tm1-with-composed-constant"},
        why);
    gate.line("markov-converse", ok, why + "; 200 lifted initial laws");

    ok = assertions_pass(r, {"mixture-identity"}, why);
    gate.line("markov-mixture-identity", ok, why);

    ok = assertions_pass(r, {"entropy-chain-identity"}, why);
    gate.line("markov-entropy-chain", ok, why);
  } catch (const std::exception& e) {
    const std::string msg = std::string("exception: ") + e.what();
    gate.line("markov-forward-composition", false, msg);
    gate.line("markov-converse", false, msg);
    gate.line("markov-mixture-identity", false, msg);
    gate.line("markov-entropy-chain", false, msg);
  }

  // ---- 7. Heat kernel: L2 bound, frozen spots, Chapman-Kolmogorov. ----
  try {
    ExperimentConfig cfg;
    cfg.kind = "heat-kernel";
    RunOptions opts;
    opts.out_dir_override = (work / "heat").string();
    const RunReport r = run_experiment(cfg, opts);
    std::string why;
    const bool ok = assertions_pass(
        r, {"kernel-l2-bound", "spot-value", "chapman-kolmogorov", "semigroup-eigenmode"},
        why);
    gate.line("heat-kernel-bound", ok, why);
  } catch (const std::exception& e) {
    gate.line("heat-kernel-bound", false, std::string("exception: ") + e.what());
  }

  // ---- 8-10. SPDE coupling suite at full scale (one shared run). ----
  try {
    const RunReport r = run_kind("spde-coupling", 20240816, {}, work / "spde");
    std::string why;

    bool ok = assertions_pass(r, {"deterministic-limit"}, why);
    gate.line("spde-deterministic-limit", ok, why);

    ok = assertions_pass(
        r,
        {"coupling-null-case", "additive-contraction", "ratio-bound-by-fit",
         "scaling-stability", "mild-consistency"},
        why);
    const bool in_budget = r.wall_seconds < 600.0;
    gate.line("spde-coupling-estimate", ok && in_budget,
              why + "; 6 pairs x 400 paths; wall " + fmt(r.wall_seconds) +
                  " s (budget 600 s)");

    ok = assertions_pass(r, {"mean-consistency"}, why);
    gate.line("spde-mean-consistency", ok, why);
  } catch (const std::exception& e) {
    const std::string msg = std::string("exception: ") + e.what();
    gate.line("spde-deterministic-limit", false, msg);
    gate.line("spde-coupling-estimate", false, msg);
    gate.line("spde-mean-consistency", false, msg);
  }

  // ---- 11. CLI determinism across thread counts. ----
  try {
    if (cli.empty()) throw std::runtime_error("--cli not given");

    const fs::path cfg_dir = work / "determinism";
    fs::create_directories(cfg_dir);
    {
      std::ofstream out(cfg_dir / "markov.conf");
      out << "kind = markov-tci\nseed = 424242\n[params]\nsteps = 2\n"
             "tilt_count = 60\nconverse_count = 20\nmixture_specs = 4\n";
    }
    {
      std::ofstream out(cfg_dir / "spde.conf");
      out << "kind = spde-coupling\nseed = 424242\n[params]\nintervals = 32\n"
             "time_levels = 128\nn_paths = 64\n";
    }

    bool ok = true;
    std::string detail;
    for (const std::string name : {std::string("markov"), std::string("spde")}) {
      const fs::path d1 = cfg_dir / (name + "-threads1");
      const fs::path d4 = cfg_dir / (name + "-threads4");
      const std::string conf = (cfg_dir / (name + ".conf")).string();
      const int code1 = run_cli(cli + " run " + conf + " --threads 1 --out " +
                                d1.string() + " > " + (cfg_dir / (name + "-1.log")).string() +
                                " 2>&1");
      const int code4 = run_cli(cli + " run " + conf + " --threads 4 --out " +
                                d4.string() + " > " + (cfg_dir / (name + "-4.log")).string() +
                                " 2>&1");
      if (code1 != 0 || code4 != 0) {
        ok = false;
        detail += name + ": exit codes " + std::to_string(code1) + "/" +
                  std::to_string(code4) + " ";
        continue;
      }
      std::size_t compared = 0;
      for (const auto& entry : fs::directory_iterator(d1)) {
        const std::string base = entry.path().filename().string();
        if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") {
          ++compared;
          if (read_file(entry.path()) != read_file(d4 / base)) {
            ok = false;
            detail += name + "/" + base + " differs ";
          }
        }
      }
      if (json_without_run_metadata(read_file(d1 / "summary.json")) !=
          json_without_run_metadata(read_file(d4 / "summary.json"))) {
        ok = false;
        detail += name + "/summary.json differs ";
      }
      detail += name + ": " + std::to_string(compared) + " csv + summary identical; ";
      if (compared == 0) {
        ok = false;
        detail += name + ": no csv produced; ";
      }
    }
    gate.line("cli-determinism", ok,
              detail + "threads 1 vs 4, same seed, byte-compared");
  } catch (const std::exception& e) {
    gate.line("cli-determinism", false, std::string("exception: ") + e.what());
  }

  std::cout << "acceptance: " << (11 - gate.failures) << "/11 criteria passed\n";
  return gate.failures == 0 ? 0 : 1;
}
