#ifndef EBL_DIRECT_SOLVER_HPP
#define EBL_DIRECT_SOLVER_HPP

#include "ebl/eos.hpp"
#include "ebl/grid.hpp"
#include "ebl/wkb_assembler.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebl {

/// Positivity loss or a stalled time step.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Cell-centred grid on [0, L1) x [0, H]: periodic in x1, reflecting wall at x2 = 0,
/// zero-gradient outflow at x2 = H.
struct SimGrid {
  int n1 = 32;
  double L1 = 2 * std::numbers::pi;
  int n2 = 256;
  double H = 1.0;
  double cfl = 0.45;

  double dx1() const { return L1 / n1; }
  double dx2() const { return H / n2; }
  double x1(int i) const { return (i + 0.5) * dx1(); }
  double x2(int j) const { return (j + 0.5) * dx2(); }
  int cells() const { return n1 * n2; }
  /// Throws GridError on empty grids or cfl outside (0, 0.45].
  void validate() const;
};

/// Conservative cell values (rho, rho v1, rho v2, rho E); column i * n2 + j.
using Cells = Eigen::Array<double, 4, Eigen::Dynamic>;

struct ConservativeState {
  SimGrid grid;
  Cells U;

  double mass() const { return U.row(0).sum() * grid.dx1() * grid.dx2(); }
};

/// (v1, v2, p, s) <-> (rho, rho v, rho E) through p = rho^gamma e^s. Throws AdmissibilityError.
Eigen::Array4d to_conservative(const Eos& eos, const Eigen::Array4d& w);
Eigen::Array4d to_primitive(const Eos& eos, const Eigen::Array4d& U);

/// Point values of u_a^eps(0) at the cell centres. Requires dx2 <= eps/8 and v2 = 0 on the wall.
ConservativeState init_from_wkb(const WkbExpansion& exp, double eps, const SimGrid& grid);

struct RunStats {
  int steps = 0;
  double max_step_change = 0;   // max over steps of max |U^{n+1} - U^n|
  double mass0 = 0;
  double mass_change = 0;       // |M(T) - M(0)| / M(0)
  double outflow = 0;           // time-integrated mass flux through x2 = H
  double mass_defect = 0;       // |M(T) - M(0) + outflow| / M(0)
  double wall_trace_ratio = 0;  // max over steps of max |v2(x2 = 0)| / max |v|, linear extrapolation
  double min_rho = 0, min_p = 0;
  double max_speed = 0;  // max of |v2| + c: the top boundary influences x2 >= H - max_speed t
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ConservativeState> snapshots;
  RunStats stats;
};

/// MUSCL-Hancock (minmod, primitive variables) with HLLC fluxes, stored at the requested
/// increasing times (t = 0 allowed). Throws SolverError on positivity loss or a stalled step.
Trajectory run(const ConservativeState& init, const Eos& eos, const std::vector<double>& times);

/// Primitive trajectory on a space-time grid (uniform times required).
StateField to_state_field(const Eos& eos, const Trajectory& traj);

/// u_a^eps at the cell centres of grid at every t_stride-th profile snapshot (only t = 0 when
/// first_only). Centres between profile nodes are reached by 6-point periodic Lagrange
/// interpolation in x1.
StateField wkb_on_cells(const WkbExpansion& exp, double eps, const SimGrid& grid, int t_stride,
                        bool first_only = false);
/// Snapshot times of that lattice.
std::vector<double> snapshot_times(const ProfileGrid& pg, int t_stride);
/// u_a^eps itself, converted to a trajectory (no solve).
Trajectory trajectory_from_wkb(const WkbExpansion& exp, double eps, const SimGrid& grid, int t_stride);

struct H1Report {
  double h1 = 0;
  double height = 0;              // the comparison covers cell centres with x2 <= height
  std::vector<double> times, l2;  // per-time L2 distance over that part of the strip
};
/// Discrete H1((0,T) x strip) distance between the trajectory and u_a^eps on the cell centres.
/// height <= 0 keeps the part of the strip outside the domain of influence of the outflow
/// boundary, x2 <= H - max_speed T; otherwise the comparison stops at x2 = height.
H1Report compare_h1(const Trajectory& traj, const WkbExpansion& exp, double eps, int t_stride, double height = 0);

/// Grid rule of a sweep member: n2 = per_eps / eps cells on [0, H]; the refined member doubles n1 and n2.
struct SimGridRule {
  int n1 = 64;
  int per_eps = 32;
  double H = 1.0;
  double cfl = 0.45;
  int t_stride = 4;
  bool refine_check = true;
  double M = 1.0;  // remainder normalization for the rescaled distance
  int max_n1 = 128, max_n2 = 4096;

  SimGrid grid(double eps, bool refined) const;
};

struct StabilityRow {
  double eps = 0;
  int grid_id = 0;  // 0 = base, 1 = refined
  double h1 = 0, h1_scaled = 0, l2_final = 0;
  double height = 0;  // top of the comparison region
  RunStats stats;
  std::string status = "ok";
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  LoglogFit fit;                     // base rows
  bool monotone = false;             // h1 strictly decreasing as eps decreases
  double max_refinement_change = 0;  // relative h1 change base -> refined
  bool complete = false;             // every member solved
};

StabilityReport stability_sweep(const WkbExpansion& exp, const std::vector<double>& eps_list,
                                const SimGridRule& rule = {});
void write_stability_csv(const StabilityReport& rep, std::ostream& os);

/// Primitive snapshot in the flat binary format: axes (component, x1 centres, x2 centres).
void write_snapshot(const std::string& path, const Eos& eos, const ConservativeState& s);

}  // namespace ebl

#endif  // EBL_DIRECT_SOLVER_HPP
