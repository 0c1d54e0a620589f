#pragma once

#include <map>
#include <string>
#include <vector>

#include "cellpop/config.hpp"

namespace cellpop {

// Outcome of one CLI command: scalar summary (reused as a sweep row) and the
// artifact files written.
struct RunResult {
  std::map<std::string, double> summary;
  std::vector<std::string> files;
  std::string label;  // e.g. the two-phase regime
};

RunResult run_eigen(const Config& cfg, const std::string& out_dir);
RunResult run_simulate(const Config& cfg, const std::string& out_dir);
RunResult run_twophase(const Config& cfg, const std::string& out_dir);
RunResult run_validate(const Config& cfg, const std::string& out_dir);
RunResult run_sweep(const Config& cfg, const std::string& out_dir);

// Ready-to-run matplotlib script for the artifacts of `command`.
void emit_plot_script(const std::string& command, const std::string& out_dir);

}  // namespace cellpop
