#pragma once

#include <string>
#include <vector>

#include "nflow/bubble.hpp"
#include "nflow/homotopy.hpp"

namespace nflow {

enum class RunMode { Flow, Minimize, Bubbles, Check };

struct RunConfig {
  RunMode mode = RunMode::Flow;
  DomainSpec domain;
  int target_m = 2;
  FlowParams flow;
  InitSpec init;
  std::string init_checkpoint;  // non-empty -> resume from file
  std::vector<double> schedule_epsilons;
  double stage_t_end = 50.0;
  DecomposeConfig bubble;
  std::array<double, 4> bubble_x0{0.5, 0.5, 0.0, 0.0};
  std::vector<std::string> bubble_checkpoints;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;
  int checkpoint_cadence = 0;  // extra mid-run checkpoints every k samples

  std::string canonical_json() const;  // sorted keys, full precision
  std::uint64_t hash() const;          // FNV-1a over canonical_json()
};

struct ConfigError {
  std::string path;     // JSON pointer-ish location
  std::string message;  // includes a suggestion for unknown keys
};

// Strict parse: unknown keys are rejected (with a nearest-key suggestion),
// all errors are collected before failing.
RunConfig parse_config(const std::string& json_text, std::vector<ConfigError>& errors);
RunConfig parse_config_file(const std::string& path, std::vector<ConfigError>& errors);

}  // namespace nflow
