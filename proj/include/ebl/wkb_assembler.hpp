#ifndef EBL_WKB_ASSEMBLER_HPP
#define EBL_WKB_ASSEMBLER_HPP

#include "ebl/eos.hpp"
#include "ebl/grid.hpp"
#include "ebl/ground_state.hpp"
#include "ebl/layer_profiles.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ebl {

/// Truncated expansion u_a = (v0 + eps sum eps^j V^j, p0 + eps sum eps^j P^j,
/// s0 + sum eps^j W_tilde^j + sum eps^{j+1} W_bar^{j+1}).
struct WkbExpansion {
  GroundState gs;
  Eos eos;
  ProfileGrid grid;
  std::vector<ProfileSet> profiles;

  int n() const { return int(profiles.size()) - 1; }
};

/// Expansion with every layer part removed.
WkbExpansion zero_layers(const WkbExpansion& exp);

/// Evaluation lattice: profile snapshots every t_stride, profile x1 nodes from
/// x1_offset every x1_stride, and an arbitrary x2 axis.
struct AssemblyGrid {
  int t_stride = 4;
  int x1_offset = 0;
  int x1_stride = 1;
  Axis x2{0.0, 1.0, 2, false};

  SpaceTimeGrid space_time(const ProfileGrid& g) const;
};

/// Grid rule: dx2 = eps / per_eps on [0, height].
AssemblyGrid residual_grid(const ProfileGrid& g, double eps, int per_eps = 16, int t_stride = 4, double height = 1.0);

/// (v1, v2, p, s) of u_a^eps at profile snapshot n, profile node i and height x2.
Eigen::Vector4d evaluate_point(const WkbExpansion& exp, double eps, int n, int i, double x2);

/// u_a^eps on the lattice; the layer is evaluated at X = x2/eps (zero beyond X_max).
StateField assemble(const WkbExpansion& exp, double eps, const AssemblyGrid& ag);

/// Residual norms of u_a^eps on the lattice, computed in x2 slabs to bound memory.
struct ResidualNorms {
  double l2 = 0, linf = 0;
  std::array<double, 4> comp{};
};
ResidualNorms residual_norms(const WkbExpansion& exp, double eps, const AssemblyGrid& ag);

struct LoglogFit {
  double slope = 0, intercept = 0, r2 = 0;
};
LoglogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs);

/// L2 over (0,T) x strip by the trapezoid rule, per component and combined.
std::array<double, 4> l2_components(const StateField& f);
double l2_norm(const StateField& f);
double linf_norm(const StateField& f);

struct SweepRow {
  double eps = 0;
  int grid_id = 0;  // 0 = base rule, 1 = refined rule
  double l2 = 0, linf = 0;
  std::array<double, 4> comp{};
};

struct SweepReport {
  std::vector<SweepRow> rows;
  LoglogFit fit, fit_inf;
  double max_refinement_change = 0;  // relative L2 change base -> refined
  bool exact = false;                // all residuals at discretization level
};

struct GridRule {
  int per_eps = 16;
  int t_stride = 4;
  bool refine_check = true;
  double exact_floor = 1e-10;
};

SweepReport residual_sweep(const WkbExpansion& exp, const std::vector<double>& eps_list, const GridRule& rule = {});
void write_sweep_csv(const SweepReport& rep, std::ostream& os);

struct K1Report {
  std::vector<double> eps, ratio;  // ||K1(u_a) - K1(u0)||_inf / eps
  double spread = 0;               // max ratio / min ratio
  double k1_ground = 0;            // ||K1(u0)||_inf
  bool pass = false;
};
/// K1(u) = S*(u) X_v v0 + L*(d_x) v0, evaluated analytically from the ground-state jets.
K1Report check_nonsingular_reduction(const WkbExpansion& exp, const std::vector<double>& eps_list,
                                     const GridRule& rule = {});

struct PolarizationCheck {
  bool pass = false;
  double max_violation = 0;
  explicit operator bool() const { return pass; }
};
/// max |(Id - P0) U_tilde^0| on the profile grid and at X = x2/eps on the residual grid.
PolarizationCheck check_polarization(const WkbExpansion& exp, double eps, double tol);

/// Discrete H1 of a - b over (0,T) x strip: centered gradients, trapezoid quadrature.
double h1_distance(const StateField& a, const StateField& b);

}  // namespace ebl

#endif  // EBL_WKB_ASSEMBLER_HPP
