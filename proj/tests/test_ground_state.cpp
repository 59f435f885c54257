#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ebl/eos.hpp"
#include "ebl/ground_state.hpp"

#include <random>

using namespace ebl;

namespace {
ScalarMap square() {
  return {[](double r) { return r * r; }, [](double r) { return 2 * r; }};
}
ScalarMap identity() {
  return {[](double y) { return y; }, [](double) { return 1.0; }};
}
}  // namespace

TEST_CASE("shear initial velocity") {
  const auto h = build_shear_initial();
  CHECK((h.h(Vec2(0.3, 0.7)) - Vec2(0.7, 0)).norm() == 0.0);
  const Mat2 J = h.jac(Vec2(0.1, 0.2));
  CHECK((J * J).norm() == 0.0);
  CHECK(J.trace() == 0.0);
  const auto rep = check_nilpotent(h, {Vec2(0, 0), Vec2(1, 2)}, 0.0);
  CHECK(rep.pass);
}

TEST_CASE("recipe initial velocity") {
  const auto h = build_recipe_initial(square(), identity());
  const Vec2 v = h.h(Vec2(0.1, 0.5));
  CHECK(v(0) == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(v(1) == doctest::Approx(0.16).epsilon(1e-14));
  // Independent oracle: transport d1 a + d2 a = 0 along the characteristic back to the wall.
  const double x1 = 0.1, x2 = 0.5;
  const double foot = x1 - x2;  // wall point reached along (1, 1)
  CHECK(std::abs(v(0) - std::pow(0.0 - foot, 2)) < 1e-14);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<Vec2> pts;
  for (int k = 0; k < 100; ++k) pts.emplace_back(U(rng), std::abs(U(rng)));
  CHECK(check_nilpotent(h, pts, 1e-10).pass);

  const auto zero = build_recipe_initial({[](double) { return 0.0; }, [](double) { return 0.0; }}, identity());
  CHECK(zero.h(Vec2(0.3, 0.9)).norm() == 0.0);
  CHECK_THROWS_AS(build_recipe_initial({[](double r) { return 1 + r; }, [](double) { return 1.0; }}, identity()),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_recipe_initial(square(), {[](double y) { return -y; }, [](double) { return -1.0; }}),
                  std::invalid_argument);
}

TEST_CASE("identity field is not nilpotent") {
  InitialVelocity h;
  h.h = [](const Vec2& x) { return x; };
  h.jac = [](const Vec2&) { return Mat2::Identity().eval(); };
  CHECK_FALSE(check_nilpotent(h, {Vec2(0.2, 0.3)}, 1e-10).pass);
}

TEST_CASE("Burgers inversion") {
  const auto h = build_shear_initial();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 2);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const double t = 0.5 * U(rng), x1 = U(rng), x2 = U(rng);
    int it = 0;
    Vec2 xi;
    const Vec2 v = solve_burgers(h, t, Vec2(x1, x2), 1e-14, 50, &it, &xi);
    worst = std::max(worst, (v - Vec2(x2, 0)).norm());
    CHECK(it <= 2);
    CHECK((xi - Vec2(x1 - t * x2, x2)).norm() < 1e-12);
  }
  CHECK(worst <= 1e-12);
  const auto r = build_recipe_initial(square(), identity());
  CHECK((solve_burgers(r, 0.0, Vec2(0.1, 0.5)) - r.h(Vec2(0.1, 0.5))).norm() == 0.0);

  // A field that folds: h = (-x1, 0) becomes singular at t = 1.
  InitialVelocity fold;
  fold.h = [](const Vec2& x) { return Vec2(-x(0), 0.0); };
  fold.jac = [](const Vec2&) {
    Mat2 J;
    J << -1, 0, 0, 0;
    return J;
  };
  CHECK_THROWS_AS(solve_burgers(fold, 1.0, Vec2(0.3, 0.1)), LifespanError);
}

TEST_CASE("recipe ground state is divergence free") {
  const auto h = build_recipe_initial(square(), identity());
  std::vector<Vec2> samples;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) samples.emplace_back(-1 + 0.1 * i, 0.1 * j);
  const double T0 = estimate_T0(h, samples);
  CHECK(T0 > 0);
  const GroundState gs = make_ground_state(h, 1.0, 0.0, 2.0, T0);
  const int n = 64;
  const double hx = 1.0 / n;
  for (double t : {0.0, T0 / 4, T0 / 2}) {
    double worst = 0;
    for (int i = 1; i < n; ++i)
      for (int j = 1; j < n; ++j) {
        const double x1 = -0.5 + i * hx, x2 = j * hx;
        const double d1 = (gs.v(t, x1 + hx, x2)(0) - gs.v(t, x1 - hx, x2)(0)) / (2 * hx);
        const double d2 = (gs.v(t, x1, x2 + hx)(1) - gs.v(t, x1, x2 - hx)(1)) / (2 * hx);
        worst = std::max(worst, std::abs(d1 + d2));
      }
    CHECK(worst <= 5 * hx * hx);
  }
  // Characteristic relation holds after inversion.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const double t = 0.5 * T0 * U(rng);
    const Vec2 x(U(rng) - 0.5, U(rng));
    Vec2 xi;
    solve_burgers(h, t, x, 1e-14, 50, nullptr, &xi);
    CHECK((xi + t * h.h(xi) - x).norm() <= 1e-14);
  }
}

TEST_CASE("verify_pro and verify_cond") {
  const GroundState gs = make_shear_ground_state();
  SpaceTimeGrid g{Axis{0, 0.25, 5, false}, Axis{0, 2 * M_PI, 16, true}, Axis{0, 1, 9, false}};
  const auto rep = verify_pro(gs, g, 1e-10);
  CHECK(rep.pass);
  CHECK(rep.accel == 0.0);
  CHECK(verify_cond(gs, g, 0.0).pass);

  GroundState bad = gs;
  bad.constant_ps = false;
  bad.p0 = [](double, double x1, double) { return 1.0 + x1; };
  const auto rb = verify_pro(bad, g, 1e-10);
  CHECK_FALSE(rb.pass);
  CHECK(rb.grad_p == doctest::Approx(1.0).epsilon(1e-8));

  const auto h = build_recipe_initial(square(), identity());
  const GroundState rg = make_ground_state(h, 1.0, 0.0, 2.0, 0.1);
  SpaceTimeGrid g0{Axis{0, 0, 1, false}, Axis{-1, 2, 16, true}, Axis{0, 1, 9, false}};
  CHECK(verify_pro(rg, g0, 1e-10).pass);
  CHECK(verify_cond(rg, g0, 1e-10).pass);

  const GroundState acc = inject_wall_acceleration(gs, 0.5);
  CHECK_FALSE(verify_cond(acc, g, 1e-10).pass);
}

TEST_CASE("shear ground state solves Euler to discretization error") {
  const GroundState gs = make_shear_ground_state();
  Eos m;
  for (int n : {16, 32}) {
    SpaceTimeGrid g{Axis{0, 0.25, n, false}, Axis{0, 2 * M_PI, n, true}, Axis{0, 1, n, false}};
    StateField f(g);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Vec2 v = gs.v(g.t.at(a), g.x1.at(i), g.x2.at(j));
          const std::size_t k = g.index(a, i, j);
          f.comp[0][k] = v(0);
          f.comp[1][k] = v(1);
          f.comp[2][k] = gs.p_ref;
          f.comp[3][k] = gs.s_ref;
        }
    const StateField r = euler_residual(m, f);
    const double dx = g.x2.step();
    for (const auto& c : r.comp) CHECK(c.abs().maxCoeff() <= 5 * dx * dx);
  }
}

TEST_CASE("normal flat factor") {
  CHECK(normal_flat_factor(make_shear_ground_state())(0.1, 0.2, 0.3) == 0.0);
  GroundState gs = make_shear_ground_state();
  gs.v_flat = nullptr;
  gs.v = [](double, double x1, double x2) { return Vec2(0.0, x2 * std::sin(x1)); };
  gs.grad_v = [](double, double x1, double x2) {
    Mat2 J;
    J << 0, 0, x2 * std::cos(x1), std::sin(x1);
    return J;
  };
  const double delta = 1e-3;
  const auto f = normal_flat_factor(gs, delta);
  for (double x2 : {0.0, 5e-4, 1e-3, 0.5}) CHECK(std::abs(f(0, 0.7, x2) - std::sin(0.7)) < 1e-8);
  CHECK(std::abs(f(0, 0.7, delta * (1 - 1e-12)) - f(0, 0.7, delta)) <= 1e-6);

  GroundState leak = gs;
  leak.v = [](double, double, double x2) { return Vec2(0.0, 1.0 + x2); };
  CHECK_THROWS_AS(normal_flat_factor(leak), std::domain_error);
}
