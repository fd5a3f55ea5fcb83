#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tcilab/experiment.hpp"
#include "tcilab/report.hpp"

namespace tci::detail {

/// Resolved inputs handed to one experiment kind: the merged parameter map,
/// the seed, the output directory (already created), and the thread budget.
struct ExpArgs {
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned threads = 0;

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;
  /// Values of the indexed family prefix.0, prefix.1, ... in index order.
  std::vector<std::string> family(const std::string& prefix) const;

  std::string path_of(const std::string& basename) const {
    return out_dir + "/" + basename;
  }
};

Assertion check(std::string name, bool passed, std::string detail);

RunReport run_gaussian_t2(const ExpArgs& args);
RunReport run_heat_kernel(const ExpArgs& args);
RunReport run_markov_tci(const ExpArgs& args);
RunReport run_spde_coupling(const ExpArgs& args);
RunReport run_spde_convolution(const ExpArgs& args);

}  // namespace tci::detail
