#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tci {

/// One named check inside a run report. The name states the invariant the
/// check instantiates; the detail carries the numbers behind the verdict.
struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Shortest round-trippable decimal rendering used for every numeric cell
/// ("%.17g"), so output bytes are a pure function of the values.
std::string format_double(double v);

/// A CSV payload: schema tag (versioned, e.g. "gaussian-cases.v1"), column
/// names, preformatted cells. Every row must match the column count.
struct CsvTable {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Writes text to the path atomically: a sibling temp file is written,
/// flushed, then renamed over the target.
void atomic_write(const std::string& path, const std::string& text);

/// Renders a table (first line "#schema=<schema>", then the header row,
/// then the data rows) and writes it atomically.
void write_csv(const std::string& path, const CsvTable& table);

/// The outcome of one experiment run: config echo, assertions, kind-specific
/// metrics (a serialized JSON object), and the files written. Wall time is
/// serialized into a separate "timing" field so deterministic comparisons
/// can drop it.
struct RunReport {
  std::string kind;
  bool has_seed = true;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<std::pair<std::string, std::string>> params;  // sorted echo
  std::vector<Assertion> assertions;
  std::string metrics_json = "{}";
  std::vector<std::string> csv_paths;  // basenames inside out_dir
  std::string summary_path;
  double wall_seconds = 0.0;

  bool passed() const {
    for (const Assertion& a : assertions)
      if (!a.passed) return false;
    return true;
  }
};

/// Serializes the report (sorted keys; timing isolated in its own field).
std::string report_to_json(const RunReport& report);

}  // namespace tci
