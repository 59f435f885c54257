#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ebl/cascade.hpp"
#include "ebl/field_io.hpp"
#include "ebl/layer_profiles.hpp"

#include <cstdio>
#include <filesystem>

using namespace ebl;

namespace {

ProfileGrid small_grid(int n1 = 32, int nt = 9) {
  ProfileGrid g;
  g.nt = nt;
  g.x1 = Axis{0.0, 2 * M_PI, n1, true};
  g.fast = FastGrid(24.0, 81, 3.0);
  return g;
}

double gauss_sin(double x1, double, double X) { return std::exp(-X * X) * std::sin(x1); }

}  // namespace

TEST_CASE("fast grid invariants") {
  FastGrid fg;
  CHECK(fg.node(0) == 0.0);
  CHECK((fg.weights() > 0).all());
  for (int l = 1; l < fg.size(); ++l) CHECK(fg.node(l) > fg.node(l - 1));
  CHECK(fg.exp_tail() <= 1e-10);
  CHECK(std::abs(fg.integrate(Eigen::exp(-fg.nodes())) - 1.0) < 1e-7);
}

TEST_CASE("entropy layer: zero data, decay failure, linearity") {
  const GroundState gs = make_shear_ground_state();
  const ProfileGrid g = small_grid();
  const LayerArray z = solve_entropy_layer(gs, [](double, double, double) { return 0.0; }, g);
  CHECK(z.data.abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(solve_entropy_layer(gs, [](double, double, double) { return 1.0; }, g), ProfileError);

  auto f = [](double x1, double x2, double X) { return std::exp(-X * X) * std::sin(x1 + x2); };
  auto h = [](double x1, double, double X) { return std::exp(-X) * X * std::cos(2 * x1); };
  const double a = 0.7, b = -1.3;
  const LayerArray sf = solve_entropy_layer(gs, f, g), sh = solve_entropy_layer(gs, h, g);
  const LayerArray sc =
      solve_entropy_layer(gs, [&](double x1, double x2, double X) { return a * f(x1, x2, X) + b * h(x1, x2, X); }, g);
  CHECK((sc.data - a * sf.data - b * sh.data).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("entropy layer on the shear converges at second order") {
  const GroundState gs = make_shear_ground_state();
  std::vector<double> err;
  for (int k = 0; k < 4; ++k) {
    const int n1 = 32 << k, nt = 8 * (1 << k) + 1;
    const ProfileGrid g = small_grid(n1, nt);
    const LayerArray W = solve_entropy_layer(gs, gauss_sin, g);
    CHECK(tail_ratio(W) <= 1e-8);
    double e2 = 0;
    const int n = nt - 1;
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < g.x2_layer.n; ++j)
        for (int l = 0; l < g.fast.size(); ++l) {
          const double X = g.fast.node(l), x2 = g.x2_layer.at(j);
          const double ex = std::exp(-X * X) * std::sin(g.x1.at(i) - g.T * x2);
          e2 += g.fast.weights()[l] * std::pow(W(n, i, j, l) - ex, 2);
        }
    err.push_back(std::sqrt(e2 * g.x1.step() / g.x2_layer.n));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double order = std::log2(err[k - 1] / err[k]);
    INFO("order " << order << " err " << err[k]);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
  }
}

TEST_CASE("entropy layer with constant normal flattening factor") {
  // c X d_X W + d_t W = 0 gives W(t, X) = init(X e^{-ct}).
  const double c = 1.5;
  GroundState gs = make_shear_ground_state();
  gs.v = [](double, double, double) { return Vec2(0.0, 0.0); };
  gs.grad_v = [](double, double, double) { return Mat2::Zero().eval(); };
  gs.dt_v = gs.v;
  gs.v_flat = [c](double, double, double) { return c; };
  auto error = [&](int nX) {
    ProfileGrid g = small_grid(8, 33);
    g.fast = FastGrid(24.0, nX, 3.0);
    const LayerArray W =
        solve_entropy_layer(gs, [](double, double, double X) { return (1 + X) * std::exp(-X * X); }, g);
    double worst = 0;
    for (int n = 0; n < g.nt; ++n)
      for (int l = 0; l < g.fast.size(); ++l) {
        const double Y = g.fast.node(l) * std::exp(-c * g.t(n));
        worst = std::max(worst, std::abs(W(n, 3, 2, l) - (1 + Y) * std::exp(-Y * Y)));
      }
    return worst;
  };
  const double coarse = error(161), fine = error(321);
  INFO(coarse << " " << fine);
  CHECK(fine <= 1e-3);
  CHECK(coarse / fine >= 4.0);
}

TEST_CASE("tangential layer against integration along characteristics") {
  const GroundState gs = make_shear_ground_state();
  Eos eos;
  const ProfileGrid g = small_grid(64, 33);
  const LayerArray W = solve_entropy_layer(gs, gauss_sin, g);

  const LayerArray B0 = solve_tangential_layer(gs, eos, LayerArray(), RegularSolution(), g,
                                               [](double, double, double) { return 0.0; });
  CHECK(B0.data.abs().maxCoeff() == 0.0);

  RegularSolution V;
  V.U[kP] = RegularArray(g.nt, g.x1.n, g.x2_reg.n);
  for (int n = 0; n < g.nt; ++n)
    for (int i = 0; i < g.x1.n; ++i)
      for (int j = 0; j < g.x2_reg.n; ++j) V.U[kP](n, i, j) = 0.3 * std::sin(g.x1.at(i));
  auto init = [](double x1, double, double X) { return std::exp(-X * X) * std::cos(x1); };
  const LayerArray B = solve_tangential_layer(gs, eos, W, V, g, init);
  CHECK(tail_ratio(B) <= 1e-8);

  // Oracle: B(T) = init(x1 - T x2) + int_0^T f(s, x1 - (T - s) x2, X) ds with the closed-form W.
  const double r0 = rho(eos, 1.0, 0.0);
  auto f = [&](double s, double x1, double x2, double X) {
    const double Wx = std::exp(-X * X) * std::sin(x1 - s * x2);
    return -(1.0 / rho(eos, 1.0, Wx) - 1.0 / r0) * 0.3 * std::cos(x1);
  };
  double worst = 0, scale = 0;
  const int n = g.nt - 1, m = 2000;
  for (int i = 0; i < g.x1.n; i += 5)
    for (int j = 0; j < g.x2_layer.n; j += 2)
      for (int l = 0; l < g.fast.size(); l += 4) {
        const double x1 = g.x1.at(i), x2 = g.x2_layer.at(j), X = g.fast.node(l), T = g.T;
        double q = 0;
        for (int k = 0; k <= m; ++k) {
          const double s = T * k / m;
          const double wgt = (k == 0 || k == m) ? 1 : (k % 2 ? 4 : 2);
          q += wgt * f(s, x1 - (T - s) * x2, x2, X);
        }
        const double ex = init(x1 - T * x2, x2, X) + q * T / (3 * m);
        worst = std::max(worst, std::abs(B(n, i, j, l) - ex));
        scale = std::max(scale, std::abs(ex));
      }
  INFO("worst " << worst << " scale " << scale);
  CHECK(worst <= 2e-3 * scale);
}

TEST_CASE("regular corrector: trivial data and constant entropy corrector") {
  const GroundState gs = make_shear_ground_state();
  Eos eos;
  const ProfileGrid g = small_grid(32, 9);
  const auto zero = solve_regular_corrector(gs, eos, FieldFn(), FieldFn(), g);
  for (const auto& u : zero.U) CHECK((u.empty() || u.data.abs().maxCoeff() == 0.0));
  const auto c = solve_regular_corrector(gs, eos, FieldFn(), [](double, double, double) { return 0.25; }, g);
  CHECK(c.U[kVt].data.abs().maxCoeff() == 0.0);
  CHECK(c.U[kVd].data.abs().maxCoeff() == 0.0);
  CHECK((c.U[kS].data - 0.25).abs().maxCoeff() <= 1e-14);

  RegularProblem bad;
  bad.init_Vd = [](double, double x1, double) { return std::sin(x1); };
  CHECK_THROWS_AS(solve_regular_corrector(gs, eos, bad, g), ProfileError);
}

TEST_CASE("regular corrector: own-stencil residual and energy bound") {
  const GroundState gs = make_shear_ground_state();
  Eos eos;
  const ProfileGrid g = small_grid(32, 9);
  RegularProblem prob;
  prob.init_Vt = [](double, double x1, double x2) { return std::sin(x1) * std::exp(-x2); };
  const RegularSolution sol = solve_regular_corrector(gs, eos, prob, g);
  double worst = 0;
  for (int n = 0; n + 1 < g.nt; ++n) {
    const auto next = advance_regular(gs, eos, prob, g, sol, n);
    for (int c = 0; c < 4; ++c) {
      Eigen::ArrayXd ref = sol.U[c].data.segment(Eigen::Index(sol.U[c].index(n + 1, 0, 0)), next[c].size());
      worst = std::max(worst, (next[c] - ref).abs().maxCoeff());
    }
  }
  CHECK(worst <= 1e-10);
  CHECK(sol.U[kVd].data.abs().maxCoeff() > 1e-4);  // the acoustic part is active

  // Gronwall with |grad v0| = 1: ||S^{1/2} V(t)|| <= e^{t/2} ||S^{1/2} V(0)|| for a no-flux wall.
  const Eigen::ArrayXd E = regular_energy(sol, eos, gs, g);
  for (int n = 0; n < g.nt; ++n) CHECK(E[n] <= E[0] * std::exp(0.5 * g.t(n)) * (1 + 1e-3));
}

TEST_CASE("polarization of the leading profile") {
  const ProfileGrid g = small_grid(8, 3);
  ProfileSet ps;
  ps.U.layer[kS] = LayerArray(g.nt, 8, g.x2_layer.n, g.fast.size());
  ps.U.layer[kS].data.setConstant(0.5);
  const ProfileSet same = polarize_leading(ps);
  CHECK((same.U.layer[kS].data == ps.U.layer[kS].data).all());
  CHECK(nonpolarized_mass(same.U) == 0.0);

  ProfileSet noisy = ps;
  noisy.U.layer[kVd] = LayerArray(g.nt, 8, g.x2_layer.n, g.fast.size());
  noisy.U.layer[kVd].data[17] = 1e-3;
  try {
    polarize_leading(noisy);
    FAIL("noise was accepted");
  } catch (const PolarizationError& e) {
    CHECK(e.max_violation == doctest::Approx(1e-3));
  }
  const ProfileSet cleaned = polarize_leading(noisy, 1e-2);
  CHECK(nonpolarized_mass(cleaned.U) == 0.0);
  CHECK(nonpolarized_mass(polarize_leading(cleaned).U) == 0.0);

  ProfileSet one = ps;
  one.order = 1;
  CHECK_THROWS_AS(polarize_leading(one), ProfileError);
}

TEST_CASE("integration of the non-polarized part") {
  ProfileGrid g = small_grid(4, 2);
  g.fast = FastGrid();
  const FastGrid& fg = g.fast;
  LayerField src;
  CHECK(integrate_nonpolarized(1, src, g).layer[kP].empty());

  src.layer[kVd] = LayerArray(1, 1, 1, fg.size());
  for (int l = 0; l < fg.size(); ++l) src.layer[kVd](0, 0, 0, l) = std::exp(-fg.node(l));
  const LayerField out = integrate_nonpolarized(1, src, g);
  CHECK(out.layer[kVd].empty());
  double worst = 0;
  for (int l = 0; l < fg.size(); ++l) worst = std::max(worst, std::abs(out.layer[kP](0, 0, 0, l) - std::exp(-fg.node(l))));
  CHECK(worst <= 1e-7);
  // d_X of the output equals minus the source.
  const Eigen::ArrayXd d = fg.derivative(out.layer[kP].data);
  CHECK((d + src.layer[kVd].data).abs().maxCoeff() <= 1e-5);

  LayerField bad;
  bad.layer[kS] = src.layer[kVd];
  CHECK_THROWS_AS(integrate_nonpolarized(1, bad, g), ProfileError);
  CHECK_THROWS_AS(integrate_nonpolarized(0, src, g), ProfileError);
}

TEST_CASE("cascade source extraction") {
  const GroundState gs = make_shear_ground_state();
  ProfileGrid g = small_grid(64, 5);
  g.x2_reg = Axis{0.0, 2.0, 33, false};
  WkbExpansion exp{gs, Eos{}, g, {ProfileSet{}}};

  ExtractionOptions opt;
  const CascadeSource z = extract_cascade_source(1, exp, opt);
  for (int c = 0; c < 4; ++c) {
    CHECK(z.layer[c].data.abs().maxCoeff() <= 1e-8);
    CHECK(z.regular[c].data.abs().maxCoeff() <= 1e-8);
  }

  // Manufactured: v = v0 + eps sin(x1) e1 leaves eps x2 cos x1 + eps^2 sin x1 cos x1 in E1
  // and eps gamma p0 cos x1 in E3.
  RegularArray Vt(g.nt, g.x1.n, g.x2_reg.n);
  for (int n = 0; n < g.nt; ++n)
    for (int i = 0; i < g.x1.n; ++i)
      for (int j = 0; j < g.x2_reg.n; ++j) Vt(n, i, j) = std::sin(g.x1.at(i));
  exp.profiles[0].U.regular[kVt] = Vt;
  opt.layer = false;
  const CascadeSource c1 = extract_cascade_source(1, exp, opt);
  const CascadeSource c2 = extract_cascade_source(2, exp, opt);
  double e1 = 0, e2 = 0, e3 = 0;
  for (int n = 0; n < g.nt; ++n)
    for (int i = 0; i < g.x1.n; ++i)
      for (int j = 0; j < g.x2_reg.n; ++j) {
        const double x1 = g.x1.at(i), x2 = g.x2_reg.at(j);
        e1 = std::max(e1, std::abs(c1.regular[0](n, i, j) - x2 * std::cos(x1)));
        e2 = std::max(e2, std::abs(c2.regular[0](n, i, j) - std::sin(x1) * std::cos(x1)));
        e3 = std::max(e3, std::abs(c1.regular[2](n, i, j) - 1.4 * std::cos(x1)));
      }
  INFO(e1 << " " << e2 << " " << e3);
  CHECK(e1 <= 1e-6);
  CHECK(e2 <= 1e-6);
  CHECK(e3 <= 1e-6);

  ExtractionOptions fine = opt;
  fine.eps_regular.clear();
  for (int k = 0; k < 13; ++k) fine.eps_regular.push_back(4e-3 + k * 2e-3);
  const CascadeSource f1 = extract_cascade_source(1, exp, fine);
  for (int c = 0; c < 4; ++c) CHECK((f1.regular[c].data - c1.regular[c].data).abs().maxCoeff() <= 1e-6);

  ExtractionOptions clustered = opt;
  clustered.eps_regular = {1e-3, 1e-3 + 1e-12, 1e-3 + 2e-12, 1e-3 + 3e-12, 1e-3 + 4e-12, 1e-3 + 5e-12, 1e-3 + 6e-12};
  CHECK_THROWS(extract_cascade_source(1, exp, clustered));
}

TEST_CASE("order one with zero leading profiles is zero") {
  const GroundState gs = make_shear_ground_state();
  ProfileGrid g = small_grid(16, 5);
  g.x2_reg = Axis{0.0, 2.0, 33, false};
  const WkbExpansion exp{gs, Eos{}, g, {ProfileSet{}}};
  const ProfileSet p1 = solve_order_one(exp);
  CHECK(p1.order == 1);
  for (int c = 0; c < 4; ++c) {
    if (!p1.U.layer[c].empty()) CHECK(p1.U.layer[c].data.abs().maxCoeff() <= 1e-8);
    if (!p1.U.regular[c].empty()) CHECK(p1.U.regular[c].data.abs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("flat field round trip") {
  FlatField f;
  f.axes = {{0.0, 1.0}, {0.0, 0.5, 1.0}};
  f.data = Eigen::ArrayXd::LinSpaced(6, -1, 1);
  const auto path = (std::filesystem::temp_directory_path() / "ebl_roundtrip.bin").string();
  write_flat_field(path, f);
  const FlatField r = read_flat_field(path);
  CHECK(r.axes == f.axes);
  CHECK((r.data == f.data).all());
  std::remove(path.c_str());
  CHECK_THROWS(read_flat_field(path));
}
