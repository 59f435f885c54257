#ifndef EBL_LAYER_PROFILES_HPP
#define EBL_LAYER_PROFILES_HPP

#include "ebl/eos.hpp"
#include "ebl/grid.hpp"
#include "ebl/ground_state.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ebl {

struct ProfileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Component slots of U = (V_t, V_d, P, W).
enum Comp : int { kVt = 0, kVd = 1, kP = 2, kS = 3 };

/// Shared discretization of (t, x1, x2, X). Snapshots t_n = n T / (nt - 1).
struct ProfileGrid {
  double T = 0.25;
  int nt = 33;
  Axis x1{0.0, 2 * std::numbers::pi, 128, true};
  Axis x2_layer{0.0, 1.0, 9, false};
  Axis x2_reg{0.0, 2.0, 129, false};
  FastGrid fast{};
  /// Semi-Lagrangian substeps per snapshot interval.
  int substeps = 1;

  double dt() const { return T / (nt - 1); }
  double t(int n) const { return n * dt(); }
};

/// Grid function over (t, x1, x2, X). n2 == 1 marks an inner field without x2 dependence.
struct LayerArray {
  int nt = 0, n1 = 0, n2 = 0, nX = 0;
  Eigen::ArrayXd data;

  LayerArray() = default;
  LayerArray(int nt_, int n1_, int n2_, int nX_)
      : nt(nt_), n1(n1_), n2(n2_), nX(nX_), data(Eigen::ArrayXd::Zero(Eigen::Index(nt_) * n1_ * n2_ * nX_)) {}
  bool empty() const { return data.size() == 0; }
  std::size_t index(int n, int i, int j, int l) const {
    return ((std::size_t(n) * n1 + i) * n2 + j) * nX + l;
  }
  double& operator()(int n, int i, int j, int l) { return data[Eigen::Index(index(n, i, j, l))]; }
  double operator()(int n, int i, int j, int l) const { return data[Eigen::Index(index(n, i, j, l))]; }
};

/// Grid function over (t, x1, x2) on the regular x2 axis.
struct RegularArray {
  int nt = 0, n1 = 0, n2 = 0;
  Eigen::ArrayXd data;

  RegularArray() = default;
  RegularArray(int nt_, int n1_, int n2_)
      : nt(nt_), n1(n1_), n2(n2_), data(Eigen::ArrayXd::Zero(Eigen::Index(nt_) * n1_ * n2_)) {}
  bool empty() const { return data.size() == 0; }
  std::size_t index(int n, int i, int j) const { return (std::size_t(n) * n1 + i) * n2 + j; }
  double& operator()(int n, int i, int j) { return data[Eigen::Index(index(n, i, j))]; }
  double operator()(int n, int i, int j) const { return data[Eigen::Index(index(n, i, j))]; }
};

/// U = U_bar(t,x) + U_tilde(t,x,X) per component; empty arrays are identically zero.
struct LayerField {
  std::array<RegularArray, 4> regular;
  std::array<LayerArray, 4> layer;
};

/// Order-j unknowns: V^j (slots Vt, Vd, P), W_tilde^j (layer S slot) and W_bar^{j+1} (regular S slot).
struct ProfileSet {
  int order = 0;
  LayerField U;
};

using InitFn = std::function<double(double x1, double x2, double X)>;
using FieldFn = std::function<double(double t, double x1, double x2)>;

/// max_{t,x} |U(X_max)| / max |U|; zero for an identically zero field.
double tail_ratio(const LayerArray& a);
void require_decay(const LayerArray& a, const std::string& what, double tol = 1e-8);

/// Single-snapshot (nt = 1) sample of f on the layer nodes; inner fields use x2 = 0 only.
LayerArray sample_layer(const ProfileGrid& g, const InitFn& f, bool inner = false);

/// Local x2 stencil: first node index and `k` Lagrange weights (and derivative weights if dw).
int x2_stencil(const Axis& ax, double x2, int k, double* w, double* dw = nullptr);
/// Sixth-order periodic derivative of strided samples at index i.
double periodic_d1(const double* f, std::ptrdiff_t stride, int n, double h, int i);
/// Regular array at snapshot n, node i, arbitrary x2 (cubic Lagrange).
double regular_at(const RegularArray& a, const Axis& x2_axis, int n, int i, double x2);
/// Layer array at snapshot n, node i, arbitrary (x2, X): cubic Lagrange in x2, Hermite in X.
double layer_at(const LayerArray& a, const ProfileGrid& g, int n, int i, double x2, double X);

/// Entropy layer transport (v_flat X d_X + X_{v0}) W = 0 by second-order semi-Lagrangian steps.
LayerArray solve_entropy_layer(const GroundState& gs, const InitFn& init, const ProfileGrid& grid);

/// Regular corrector output: V_bar components and W_bar.
struct RegularSolution {
  std::array<RegularArray, 4> U;  // Vt, Vd, P, W
};

/// Optional data for the linearized Euler solve.
struct RegularProblem {
  FieldFn init_Vt, init_Vd, init_P, init_W;  // empty = zero
  std::array<RegularArray, 4> source;        // po-form right-hand sides at snapshots; empty = zero
  RegularArray wall_Vd;                      // wall trace of V_d at snapshots (n2 = 1); empty = zero
  double cfl = 0.4;
};

/// Linearized Euler about u0 with V_d = g at the wall, SSP-RK2 + second-order upwind splitting.
/// Constant p0, s0 are required (K0 coupling reduces to V.grad v0).
RegularSolution solve_regular_corrector(const GroundState& gs, const Eos& eos, const RegularProblem& prob,
                                        const ProfileGrid& grid);

/// Convenience overload: prescribed tangential velocity and entropy corrector, zero wall data.
RegularSolution solve_regular_corrector(const GroundState& gs, const Eos& eos, const FieldFn& init_Vt,
                                        const FieldFn& init_W1, const ProfileGrid& grid);

/// Re-applies the solver's own stepping from snapshot n; returns the state at snapshot n + 1.
std::array<Eigen::ArrayXd, 4> advance_regular(const GroundState& gs, const Eos& eos, const RegularProblem& prob,
                                              const ProfileGrid& grid, const RegularSolution& sol, int n);

/// Energy sum_k ||S^{1/2} V(t_k)||_{L2} over the regular grid at every snapshot.
Eigen::ArrayXd regular_energy(const RegularSolution& sol, const Eos& eos, const GroundState& gs,
                              const ProfileGrid& grid);

/// Tangential layer: (X_{v0} + v_flat X d_X) B + B d_1 v0_1 = -(1/rho_S - 1/rho_0) d_1 P_bar
/// - (1 - rho_0/rho_S) (X_{v0} v0_1 / x_2) X, with rho_S = rho(p0, s0 + W_tilde).
LayerArray solve_tangential_layer(const GroundState& gs, const Eos& eos, const LayerArray& W_tilde0,
                                  const RegularSolution& V0_regular, const ProfileGrid& grid, const InitFn& init);

/// Generic linear transport along the ground-state characteristics with source f and
/// zero-order coefficient k: (d_t + v0.grad + v_flat X d_X + k) U = f. For an inner
/// field (n2 == 1) the wall traces of v0 are used. Trapezoidal source integration.
LayerArray transport_layer(const GroundState& gs, const ProfileGrid& grid, const LayerArray& init,
                           const LayerArray* source, const FieldFn& k);

struct PolarizationError : ProfileError {
  double max_violation;
  PolarizationError(const std::string& m, double v) : ProfileError(m), max_violation(v) {}
};

/// Verifies (Id - P0) U_tilde^0 = 0 up to tol and zeroes those slots exactly.
ProfileSet polarize_leading(const ProfileSet& ps, double tol = 0.0);
/// max |(Id - P0) layer| over the grid.
double nonpolarized_mass(const LayerField& U);

/// (Id - P0) U^j = -L_d^{-1} int_X^inf source: source slots Vd and P (symmetrized form).
/// Returns a LayerField with layer slots Vd and P filled.
LayerField integrate_nonpolarized(int j, const LayerField& source, const ProfileGrid& grid, double tol = 1e-12);

}  // namespace ebl

#endif  // EBL_LAYER_PROFILES_HPP
