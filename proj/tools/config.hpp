#ifndef EBL_TOOLS_CONFIG_HPP
#define EBL_TOOLS_CONFIG_HPP

#include "ebl/direct_solver.hpp"
#include "ebl/eos.hpp"
#include "ebl/layer_profiles.hpp"

#include "json.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebl::cli {

/// Schema violation; path names the offending key ("grid.n1", "sweep.eps[2]").
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(const std::string& p, const std::string& what) : std::runtime_error(p + ": " + what), path(p) {}
};

inline const std::vector<std::string> kExperiments{"ground-state", "layer", "assemble", "residual-sweep",
                                                   "norms", "stability", "all"};

struct GroundStateConfig {
  std::string kind = "shear";  // shear | recipe
  std::string a_init = "square", F = "identity";
  double p0 = 1.0, s0 = 0.0;
  double L = 2 * std::numbers::pi;
};

struct GridConfig {
  double T = 0.25;
  int nt = 33, n1 = 128;
  int x2_reg_n = 129;
  double x2_reg_max = 2.0;
  double X_max = 24.0;
  int nX = 161;
  double kappa = 3.0;
};

struct SweepConfig {
  int order = 0;
  std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  int per_eps = 16, t_stride = 4;
  bool refine_check = true;
};

struct NormsConfig {
  int m = 8;
  std::vector<double> lambda{1, 2, 4};
  double sobolev_lambda = 1.0;
  std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
};

struct StabilityConfig {
  std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  SimGridRule rule;
};

struct ExperimentConfig {
  std::string experiment;
  Eos eos;
  GroundStateConfig ground_state;
  GridConfig grid;
  SweepConfig sweep;
  NormsConfig norms;
  StabilityConfig stability;
  std::string out = "ebl_out";
  std::uint64_t seed = 42;

  ProfileGrid profile_grid() const;
};

/// Validates before any compute. Required: experiment, eos.gamma, ground_state.kind.
/// Unknown keys and wrong types are errors naming the key path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

/// Halves the resolutions (smoke runs only).
void make_quick(ExperimentConfig& c);

}  // namespace ebl::cli

#endif  // EBL_TOOLS_CONFIG_HPP
