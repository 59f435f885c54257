#include "ebl/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ebl {

InitialVelocity build_shear_initial() {
  InitialVelocity iv;
  iv.kind = InitialVelocity::Kind::shear;
  iv.descriptor = "shear";
  iv.h = [](const Vec2& x) { return Vec2(x(1), 0.0); };
  iv.jac = [](const Vec2&) {
    Mat2 J;
    J << 0, 1, 0, 0;
    return J;
  };
  return iv;
}

InitialVelocity build_recipe_initial(const ScalarMap& a_init, const ScalarMap& F) {
  if (std::abs(a_init.f(0.0)) > 1e-14) throw std::invalid_argument("recipe: a_init(0) != 0");
  if (std::abs(F.f(0.0)) > 1e-14) throw std::invalid_argument("recipe: F(0) != 0");
  for (int k = -20; k <= 20; ++k) {
    const double y = 0.25 * k;
    if (!(F.df(y) > 0)) {
      std::ostringstream os;
      os << "recipe: F' <= 0 at y=" << y;
      throw std::invalid_argument(os.str());
    }
  }
  InitialVelocity iv;
  iv.kind = InitialVelocity::Kind::recipe;
  iv.descriptor = "recipe";
  iv.h = [a_init, F](const Vec2& x) {
    const double r = x(1) - x(0);
    const double a = r > 0 ? a_init.f(r) : 0.0;
    return Vec2(a, F.f(a));
  };
  iv.jac = [a_init, F](const Vec2& x) {
    const double r = x(1) - x(0);
    const double a = r > 0 ? a_init.f(r) : 0.0;
    const double da = r > 0 ? a_init.df(r) : 0.0;
    Mat2 J;
    J << -da, da, -F.df(a) * da, F.df(a) * da;
    return J;
  };
  return iv;
}

NilpotentReport check_nilpotent(const InitialVelocity& h, const std::vector<Vec2>& points, double tol) {
  NilpotentReport rep;
  for (const auto& x : points) {
    const Mat2 J = h.jac(x);
    rep.max_trace = std::max(rep.max_trace, std::abs(J.trace()));
    rep.max_det = std::max(rep.max_det, std::abs(J.determinant()));
  }
  rep.pass = rep.max_trace <= tol && rep.max_det <= tol;
  return rep;
}

Vec2 solve_burgers(const InitialVelocity& h, double t, const Vec2& x, double newton_tol, int max_iter,
                   int* iterations, Vec2* foot) {
  Vec2 xi = x;
  auto G = [&](const Vec2& z) -> Vec2 { return z + t * h.h(z) - x; };
  Vec2 r = G(xi);
  int it = 0;
  while (r.norm() > newton_tol) {
    if (it >= max_iter) {
      std::ostringstream os;
      os << "solve_burgers: no convergence at t=" << t << " x=(" << x(0) << "," << x(1) << ")";
      throw LifespanError(os.str());
    }
    const Mat2 Jm = Mat2::Identity() + t * h.jac(xi);
    const double det = Jm.determinant();
    if (std::abs(det) < 1e-12) {
      std::ostringstream os;
      os << "solve_burgers: singular Jacobian at t=" << t << " x=(" << x(0) << "," << x(1) << ")";
      throw LifespanError(os.str());
    }
    Vec2 step = Jm.inverse() * r;
    double lam = 1.0;
    Vec2 trial = xi - step;
    Vec2 rt = G(trial);
    // Damping: halve until the residual does not grow.
    while (rt.norm() > r.norm() && lam > 1e-4) {
      lam *= 0.5;
      trial = xi - lam * step;
      rt = G(trial);
    }
    xi = trial;
    r = rt;
    ++it;
  }
  if (iterations) *iterations = it;
  if (foot) *foot = xi;
  return h.h(xi);
}

double estimate_T0(const InitialVelocity& h, const std::vector<Vec2>& samples) {
  double mx = 0;
  for (const auto& x : samples) {
    Eigen::JacobiSVD<Mat2> svd(h.jac(x));
    mx = std::max(mx, svd.singularValues()(0));
  }
  if (mx == 0) return 1e30;
  return 0.5 * (0.5 / mx);
}

namespace {
std::function<double(double, double, double)> constant_fn(double c) {
  return [c](double, double, double) { return c; };
}
}  // namespace

GroundState make_shear_ground_state(double p0, double s0, double L) {
  GroundState gs;
  gs.name = "shear";
  gs.v = [](double, double, double x2) { return Vec2(x2, 0.0); };
  gs.grad_v = [](double, double, double) {
    Mat2 J;
    J << 0, 1, 0, 0;
    return J;
  };
  gs.dt_v = [](double, double, double) { return Vec2::Zero().eval(); };
  gs.p0 = constant_fn(p0);
  gs.s0 = constant_fn(s0);
  gs.p_ref = p0;
  gs.s_ref = s0;
  gs.T0 = 1e30;
  gs.L = L;
  gs.v_flat = constant_fn(0.0);
  return gs;
}

GroundState make_ground_state(const InitialVelocity& h, double p0, double s0, double L, double T0) {
  GroundState gs;
  gs.name = h.descriptor;
  gs.v = [h](double t, double x1, double x2) { return solve_burgers(h, t, Vec2(x1, x2)); };
  gs.grad_v = [h](double t, double x1, double x2) {
    Vec2 xi;
    solve_burgers(h, t, Vec2(x1, x2), 1e-14, 50, nullptr, &xi);
    const Mat2 Jh = h.jac(xi);
    return Mat2(Jh * (Mat2::Identity() + t * Jh).inverse());
  };
  gs.dt_v = [h](double t, double x1, double x2) {
    Vec2 xi;
    const Vec2 v = solve_burgers(h, t, Vec2(x1, x2), 1e-14, 50, nullptr, &xi);
    const Mat2 Jh = h.jac(xi);
    return Vec2(-(Jh * (Mat2::Identity() + t * Jh).inverse()) * v);
  };
  gs.p0 = constant_fn(p0);
  gs.s0 = constant_fn(s0);
  gs.p_ref = p0;
  gs.s_ref = s0;
  gs.T0 = T0;
  gs.L = L;
  return gs;
}

GroundState inject_wall_acceleration(const GroundState& gs, double a) {
  GroundState out = gs;
  out.name = gs.name + "+accel";
  out.v = [v = gs.v, a](double t, double x1, double x2) { return Vec2(v(t, x1, x2) + Vec2(a * t, 0.0)); };
  out.dt_v = [d = gs.dt_v, a](double t, double x1, double x2) { return Vec2(d(t, x1, x2) + Vec2(a, 0.0)); };
  return out;
}

namespace {
/// Fourth-order centered gradient (t, x1, x2) of a callable.
Eigen::Vector3d grad_txx(const std::function<double(double, double, double)>& f, double t, double x1, double x2) {
  const double h = 1e-3;
  Eigen::Vector3d g;
  auto d = [&](int a) {
    auto at = [&](double s) {
      return f(t + (a == 0) * s, x1 + (a == 1) * s, x2 + (a == 2) * s);
    };
    return (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
  };
  for (int a = 0; a < 3; ++a) g(a) = d(a);
  return g;
}
}  // namespace

ProReport verify_pro(const GroundState& gs, const SpaceTimeGrid& grid, double tol) {
  ProReport rep;
  for (int n = 0; n < grid.t.n; ++n)
    for (int i = 0; i < grid.x1.n; ++i)
      for (int j = 0; j < grid.x2.n; ++j) {
        const double t = grid.t.at(n), x1 = grid.x1.at(i), x2 = grid.x2.at(j);
        rep.accel = std::max(rep.accel, gs.acceleration(t, x1, x2).cwiseAbs().maxCoeff());
        rep.div = std::max(rep.div, std::abs(gs.grad_v(t, x1, x2).trace()));
        if (!gs.constant_ps) rep.grad_p = std::max(rep.grad_p, grad_txx(gs.p0, t, x1, x2).cwiseAbs().maxCoeff());
      }
  rep.pass = rep.accel <= tol && rep.div <= tol && rep.grad_p <= tol;
  return rep;
}

CondReport verify_cond(const GroundState& gs, const SpaceTimeGrid& wall_grid, double tol) {
  CondReport rep;
  for (int n = 0; n < wall_grid.t.n; ++n)
    for (int i = 0; i < wall_grid.x1.n; ++i) {
      const double t = wall_grid.t.at(n), x1 = wall_grid.x1.at(i);
      rep.accel = std::max(rep.accel, gs.acceleration(t, x1, 0.0).cwiseAbs().maxCoeff());
      if (!gs.constant_ps) {
        const Eigen::Vector3d g = grad_txx(gs.p0, t, x1, 0.0);
        const Vec2 v = gs.v(t, x1, 0.0);
        rep.dp = std::max(rep.dp, std::abs(g(0) + v(0) * g(1) + v(1) * g(2)));
      }
    }
  rep.pass = rep.accel <= tol && rep.dp <= tol;
  return rep;
}

std::function<double(double, double, double)> normal_flat_factor(const GroundState& gs, double delta,
                                                                 double wall_tol) {
  for (int k = 0; k < 16; ++k) {
    const double x1 = gs.L * k / 16.0;
    if (std::abs(gs.v(0.0, x1, 0.0)(1)) > wall_tol)
      throw std::domain_error("normal_flat_factor: v_d does not vanish at the wall");
  }
  if (gs.v_flat) return gs.v_flat;
  auto v = gs.v;
  auto J = gs.grad_v;
  return [v, J, delta](double t, double x1, double x2) {
    if (x2 >= delta) return v(t, x1, x2)(1) / x2;
    // Blend the wall derivative with the quotient at delta: continuous at delta.
    const double w0 = J(t, x1, 0.0)(1, 1);
    const double wd = v(t, x1, delta)(1) / delta;
    return w0 + (wd - w0) * (x2 / delta);
  };
}

}  // namespace ebl
