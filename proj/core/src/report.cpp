#include "tcilab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tci {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path())
    std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, target);
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::string text = "#schema=" + table.schema + "\n";
  const auto append_row = [&text](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) text += ',';
      text += cells[i];
    }
    text += '\n';
  };
  append_row(table.columns);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::logic_error("csv row width does not match the columns of " +
                             table.schema);
    append_row(row);
  }
  atomic_write(path, text);
}

std::string report_to_json(const RunReport& report) {
  nlohmann::json doc;
  doc["kind"] = report.kind;
  if (report.has_seed) doc["seed"] = report.seed;
  doc["out_dir"] = report.out_dir;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : report.params) params[key] = value;
  doc["params"] = params;
  nlohmann::json assertions = nlohmann::json::array();
  for (const Assertion& a : report.assertions)
    assertions.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  doc["assertions"] = assertions;
  doc["passed"] = report.passed();
  doc["metrics"] = nlohmann::json::parse(report.metrics_json);
  doc["csv"] = report.csv_paths;
  doc["timing"] = {{"wall_seconds", report.wall_seconds}};
  return doc.dump(2) + "\n";
}

}  // namespace tci
