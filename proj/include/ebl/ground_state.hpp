#ifndef EBL_GROUND_STATE_HPP
#define EBL_GROUND_STATE_HPP

#include "ebl/grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebl {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct LifespanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scalar map with its derivative.
struct ScalarMap {
  std::function<double(double)> f, df;
};

/// Initial velocity h with analytic Jacobian (J_ij = d_j h_i).
struct InitialVelocity {
  enum class Kind { shear, recipe, custom };
  Kind kind = Kind::custom;
  std::function<Vec2(const Vec2&)> h;
  std::function<Mat2(const Vec2&)> jac;
  std::string descriptor;
};

InitialVelocity build_shear_initial();
/// h = (a, F(a)) with a(x1, x2) = a_init(x2 - x1) above the diagonal, 0 below.
InitialVelocity build_recipe_initial(const ScalarMap& a_init, const ScalarMap& F);

struct NilpotentReport {
  double max_trace = 0, max_det = 0;
  bool pass = false;
};
NilpotentReport check_nilpotent(const InitialVelocity& h, const std::vector<Vec2>& points, double tol);

/// Newton inversion of xi + t h(xi) = x, returning h(xi).
Vec2 solve_burgers(const InitialVelocity& h, double t, const Vec2& x, double newton_tol = 1e-14,
                   int max_iter = 50, int* iterations = nullptr, Vec2* foot = nullptr);

/// Half of the smallest t with ||t h'|| >= 0.5 over the samples.
double estimate_T0(const InitialVelocity& h, const std::vector<Vec2>& samples);

/// Ground state (v0, p0, s0) with derivatives.
struct GroundState {
  std::string name;
  std::function<Vec2(double, double, double)> v;       // v0(t, x1, x2)
  std::function<Mat2(double, double, double)> grad_v;  // d_j v_i
  std::function<Vec2(double, double, double)> dt_v;
  std::function<double(double, double, double)> p0, s0;
  double p_ref = 1.0, s_ref = 0.0;  // values at the origin; exact when constant
  bool constant_ps = true;
  double T0 = 1.0;
  double L = 2 * std::numbers::pi;
  std::function<double(double, double, double)> v_flat;  // analytic v_d / x_d when known

  /// X_{v0} v0 = d_t v0 + (grad v0) v0.
  Vec2 acceleration(double t, double x1, double x2) const {
    return dt_v(t, x1, x2) + grad_v(t, x1, x2) * v(t, x1, x2);
  }
};

GroundState make_shear_ground_state(double p0 = 1.0, double s0 = 0.0, double L = 2 * std::numbers::pi);
/// Ground state carried by the Burgers flow of h, with constant p0, s0.
GroundState make_ground_state(const InitialVelocity& h, double p0, double s0, double L, double T0);
/// Adds a uniform tangential velocity a t: breaks the wall conditions on purpose.
GroundState inject_wall_acceleration(const GroundState& gs, double a);

struct ProReport {
  double accel = 0, div = 0, grad_p = 0;
  bool pass = false;
};
ProReport verify_pro(const GroundState& gs, const SpaceTimeGrid& grid, double tol);

struct CondReport {
  double accel = 0, dp = 0;
  bool pass = false;
};
/// Uses the (t, x1) axes of the grid at x2 = 0.
CondReport verify_cond(const GroundState& gs, const SpaceTimeGrid& wall_grid, double tol);

/// v_d0 / x_d: analytic if known, else quotient above delta blended to the wall derivative below.
std::function<double(double, double, double)> normal_flat_factor(const GroundState& gs, double delta = 1e-3,
                                                                 double wall_tol = 1e-10);

}  // namespace ebl

#endif  // EBL_GROUND_STATE_HPP
