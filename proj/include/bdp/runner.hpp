#pragma once

#include <string>

// Experiment entry points behind the CLI subcommands. Each returns a process
// exit status: 0 success, 1 runtime failure, 2 config/usage error.

namespace bdp {

int cmd_search(const std::string& config_path, const std::string& out_dir);
int cmd_grid(const std::string& config_path, const std::string& out_dir);
int cmd_eval(const std::string& genotype_path, const std::string& config_path,
             const std::string& out_dir = "");
int cmd_plot(const std::string& run_dir);

// Line charts (accuracy, remaining counts, balance, eigenvalue) rendered as
// plain-text SVG from a trajectory.csv.
void emit_svg(const std::string& trajectory_csv_path, const std::string& svg_path);

}  // namespace bdp
