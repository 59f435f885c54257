#ifndef EBL_TOOLS_EXPERIMENTS_HPP
#define EBL_TOOLS_EXPERIMENTS_HPP

#include "config.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ebl::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2, kComputeError = 3 };

/// Compute failure tagged with module and stage, e.g. "[direct_solver/stability] ...".
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string name;
  double measured = 0;
  std::string relation;  // "<=", ">=", "in", "=="
  double lo = 0, hi = 0;
  bool pass = false;

  std::string threshold() const;
};

struct Artifact {
  std::string path;  // relative to the output directory
  std::string description;
};

struct RunResult {
  std::vector<Check> checks;
  std::vector<Artifact> artifacts;
  bool all_pass() const;
};

/// Runs the configured experiment into cfg.out, then writes checks.csv and manifest.tsv
/// (path, sha256, description; check lines carry threshold and measured value).
RunResult run_experiment(const ExperimentConfig& cfg);

std::string sha256_file(const std::string& path);

}  // namespace ebl::cli

#endif  // EBL_TOOLS_EXPERIMENTS_HPP
