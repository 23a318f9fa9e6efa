#pragma once

#include "nflow/checkpoint.hpp"
#include "nflow/config.hpp"

namespace nflow {

struct RunOutputs {
  int exit_code = 0;           // 0 ok, 1 config error, 2 numerical failure
  std::string error;           // set when exit_code != 0
  std::string csv_path;
  std::string report_path;     // JSON summary
  std::string checkpoint_path; // final state
};

// Execute a parsed configuration end to end: build domain/target/init, run
// the requested mode, and write monitors.csv, report.json and final.nflw
// under config.output_dir. Deterministic for fixed config/seed/threads.
RunOutputs execute(const RunConfig& cfg, bool verbose);

// CSV monitor serialization (also used by tests for byte comparisons).
std::string trajectory_csv(const Trajectory& traj, std::uint64_t config_hash);

}  // namespace nflow
