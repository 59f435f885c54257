#include "ebl/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace ebl {

namespace {

struct Jet {
  double v = 0, dt = 0, d1 = 0, d2 = 0;
};

/// Time-derivative weights at snapshot n: five-point Lagrange, shifted near the ends.
struct TimeStencil {
  int s = 0, k = 5;
  double w[5] = {0, 0, 0, 0, 0};
};

TimeStencil time_stencil(int n, int nt, double dt) {
  TimeStencil ts;
  ts.k = std::min(5, nt);
  ts.s = std::clamp(n - ts.k / 2, 0, nt - ts.k);
  double xs[5] = {}, w[5], dw[5];
  for (int m = 0; m < ts.k; ++m) xs[m] = ts.s + m;
  lagrange_weights_d(xs, ts.k, double(n), w, dw);
  for (int m = 0; m < ts.k; ++m) ts.w[m] = dw[m] / dt;
  return ts;
}

template <class F>
double d1_periodic(const F& val, int i, int n1, double h) {
  auto v = [&](int o) { return val(((i + o) % n1 + n1) % n1); };
  return (-v(-3) + 9 * v(-2) - 45 * v(-1) + 45 * v(1) - 9 * v(2) + v(3)) / (60 * h);
}

Jet regular_jet(const RegularArray& a, const ProfileGrid& g, const TimeStencil& ts, int n, int i, double x2) {
  Jet J;
  if (a.empty()) return J;
  double w[5], dw[5];
  const int j0 = x2_stencil(g.x2_reg, x2, 5, w, dw);
  auto val = [&](int nn, int ii) {
    double s = 0;
    for (int m = 0; m < 5; ++m) s += w[m] * a(nn, ii, j0 + m);
    return s;
  };
  J.v = val(n, i);
  for (int m = 0; m < ts.k; ++m) J.dt += ts.w[m] * val(ts.s + m, i);
  J.d1 = d1_periodic([&](int ii) { return val(n, ii); }, i, a.n1, g.x1.step());
  for (int m = 0; m < 5; ++m) J.d2 += dw[m] * a(n, i, j0 + m);
  return J;
}

/// Layer jet at X node l; d2 holds the slow x2 derivative, dX the fast one.
Jet layer_jet(const LayerArray& a, const ProfileGrid& g, const TimeStencil& ts, int n, int i, double x2, int l,
              double& dX) {
  Jet J;
  dX = 0;
  if (a.empty()) return J;
  double w[4] = {1, 0, 0, 0}, dw[4] = {0, 0, 0, 0};
  int j0 = 0, k = 1;
  if (a.n2 > 1) {
    k = 4;
    j0 = x2_stencil(g.x2_layer, x2, 4, w, dw);
  }
  auto val = [&](int nn, int ii) {
    double s = 0;
    for (int m = 0; m < k; ++m) s += w[m] * a(nn, ii, j0 + m, l);
    return s;
  };
  J.v = val(n, i);
  for (int m = 0; m < ts.k; ++m) J.dt += ts.w[m] * val(ts.s + m, i);
  J.d1 = d1_periodic([&](int ii) { return val(n, ii); }, i, a.n1, g.x1.step());
  for (int m = 0; m < k; ++m) {
    J.d2 += dw[m] * a(n, i, j0 + m, l);
    dX += w[m] * g.fast.derivative_at(a.data.data() + a.index(n, i, j0 + m, 0), 1, l);
  }
  return J;
}

void add(Jet& acc, const Jet& j, double c) {
  acc.v += c * j.v;
  acc.dt += c * j.dt;
  acc.d1 += c * j.d1;
  acc.d2 += c * j.d2;
}

}  // namespace

Eigen::Vector4d expansion_residual(const WkbExpansion& exp, double eps, int n, int i, double x2, int l,
                                   bool with_layers) {
  const ProfileGrid& g = exp.grid;
  const GroundState& gs = exp.gs;
  if (!gs.constant_ps) throw ProfileError("expansion_residual: constant p0, s0 required");
  const double t = g.t(n), x1 = g.x1.at(i);
  const TimeStencil ts = time_stencil(n, g.nt, g.dt());
  const Vec2 v0 = gs.v(t, x1, x2), a0 = gs.dt_v(t, x1, x2);
  const Mat2 J0 = gs.grad_v(t, x1, x2);
  std::array<Jet, 4> u;  // v1, v2, p, s
  for (int c = 0; c < 2; ++c) u[c] = Jet{v0(c), a0(c), J0(c, 0), J0(c, 1)};
  u[2].v = gs.p_ref;
  u[3].v = gs.s_ref;
  for (const ProfileSet& ps : exp.profiles) {
    const double e1 = std::pow(eps, ps.order + 1), e0 = std::pow(eps, ps.order);
    for (int c = 0; c < 4; ++c) {
      const double cr = e1, cl = c == kS ? e0 : e1;
      add(u[c], regular_jet(ps.U.regular[c], g, ts, n, i, x2), cr);
      if (with_layers && l >= 0) {
        double dX;
        Jet lj = layer_jet(ps.U.layer[c], g, ts, n, i, x2, l, dX);
        lj.d2 += dX / eps;
        add(u[c], lj, cl);
      }
    }
  }
  const double ir = 1.0 / rho(exp.eos, u[2].v, u[3].v);
  const double ia = 1.0 / alpha(exp.eos, u[2].v, u[3].v);
  auto X = [&](int c) { return u[c].dt + u[0].v * u[c].d1 + u[1].v * u[c].d2; };
  return Eigen::Vector4d(X(0) + ir * u[2].d1, X(1) + ir * u[2].d2, X(2) + ia * (u[0].d1 + u[1].d2), X(3));
}

namespace {

/// Least-squares projector for the scaled Vandermonde system.
struct EpsFit {
  Eigen::MatrixXd pinv;   // (deg+1) x K, on scaled eps
  Eigen::MatrixXd resid;  // K x K, I - V pinv
  double scale = 1, condition = 0;
};

EpsFit make_fit(const std::vector<double>& eps, int deg) {
  const int K = int(eps.size());
  if (K < deg + 1) throw ProfileError("eps fit: fewer samples than coefficients");
  std::vector<double> s = eps;
  std::sort(s.begin(), s.end());
  for (int k = 0; k + 1 < K; ++k)
    if (s[k + 1] - s[k] <= 1e-12 * s.back()) throw ProfileError("eps fit: samples not distinct");
  EpsFit f;
  f.scale = s.back();
  Eigen::MatrixXd V(K, deg + 1);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m <= deg; ++m) V(k, m) = std::pow(eps[k] / f.scale, m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  f.condition = sv(0) / sv(sv.size() - 1);
  f.pinv = svd.solve(Eigen::MatrixXd::Identity(K, K));
  f.resid = Eigen::MatrixXd::Identity(K, K) - V * f.pinv;
  return f;
}

}  // namespace

Eigen::VectorXd fit_eps_polynomial(const std::vector<double>& eps, const Eigen::VectorXd& y, int deg, double* misfit,
                                   double* condition) {
  const EpsFit f = make_fit(eps, deg);
  Eigen::VectorXd c = f.pinv * y;
  for (int m = 0; m <= deg; ++m) c(m) /= std::pow(f.scale, m);
  if (misfit) *misfit = (f.resid * y).cwiseAbs().maxCoeff();
  if (condition) *condition = f.condition;
  return c;
}

CascadeSource extract_cascade_source(int order, const WkbExpansion& partial, const ExtractionOptions& opt) {
  if (order < 0 || order > opt.degree) throw ProfileError("extract_cascade_source: order outside fit degree");
  const ProfileGrid& g = partial.grid;
  const int nt = g.nt, n1 = g.x1.n, nX = g.fast.size();
  CascadeSource out;
  out.order = order;
  double worst = 0, scale = 0;

  auto check = [&](const EpsFit& f, const std::vector<double>& eps) {
    if (int(eps.size()) < order + 2) throw ProfileError("extract_cascade_source: need at least order + 2 samples");
    if (f.condition > opt.max_condition) {
      std::ostringstream os;
      os << "extract_cascade_source: ill-conditioned Vandermonde (cond " << f.condition << ")";
      throw ProfileError(os.str());
    }
    out.condition = std::max(out.condition, f.condition);
  };
  if (opt.layer) {
    const EpsFit f = make_fit(opt.eps_layer, opt.degree);
    check(f, opt.eps_layer);
    const int K = int(opt.eps_layer.size());
    const double pw = std::pow(f.scale, order);
    for (auto& a : out.layer) a = LayerArray(nt, n1, 1, nX);
#pragma omp parallel for collapse(2) schedule(dynamic) reduction(max : worst, scale)
    for (int n = 0; n < nt; ++n)
      for (int i = 0; i < n1; ++i) {
        Eigen::MatrixXd Y(K, 4);
        for (int l = 0; l < nX; ++l) {
          const double X = g.fast.node(l);
          for (int k = 0; k < K; ++k) {
            const double e = opt.eps_layer[k];
            Y.row(k) = (expansion_residual(partial, e, n, i, e * X, l, true) -
                        expansion_residual(partial, e, n, i, e * X, -1, false))
                           .transpose();
          }
          const Eigen::MatrixXd C = f.pinv * Y;
          const Eigen::MatrixXd R = f.resid * Y;
          for (int c = 0; c < 4; ++c) out.layer[c](n, i, 0, l) = C(order, c) / pw;
          worst = std::max(worst, R.cwiseAbs().maxCoeff());
          scale = std::max(scale, Y.cwiseAbs().maxCoeff());
        }
      }
  }
  if (opt.regular) {
    const EpsFit f = make_fit(opt.eps_regular, opt.degree);
    check(f, opt.eps_regular);
    const int K = int(opt.eps_regular.size()), n2 = g.x2_reg.n;
    const double pw = std::pow(f.scale, order);
    for (auto& a : out.regular) a = RegularArray(nt, n1, n2);
#pragma omp parallel for collapse(2) schedule(dynamic) reduction(max : worst, scale)
    for (int n = 0; n < nt; ++n)
      for (int i = 0; i < n1; ++i) {
        Eigen::MatrixXd Y(K, 4);
        for (int j = 0; j < n2; ++j) {
          for (int k = 0; k < K; ++k)
            Y.row(k) = expansion_residual(partial, opt.eps_regular[k], n, i, g.x2_reg.at(j), -1, false).transpose();
          const Eigen::MatrixXd C = f.pinv * Y;
          const Eigen::MatrixXd R = f.resid * Y;
          for (int c = 0; c < 4; ++c) out.regular[c](n, i, j) = C(order, c) / pw;
          worst = std::max(worst, R.cwiseAbs().maxCoeff());
          scale = std::max(scale, Y.cwiseAbs().maxCoeff());
        }
      }
  }
  out.fit_residual = scale > 0 ? worst / scale : 0.0;
  if (out.fit_residual > opt.fit_tol) {
    std::ostringstream os;
    os << "extract_cascade_source: fit residual " << out.fit_residual << " above " << opt.fit_tol;
    throw ProfileError(os.str());
  }
  return out;
}

namespace {

/// Antiderivative with zero mean of a periodic sample (mean of g dropped).
Eigen::ArrayXd periodic_antiderivative(const Eigen::ArrayXd& g, double L) {
  const int n = int(g.size());
  using cd = std::complex<double>;
  std::vector<cd> ghat(n);
  for (int k = 0; k < n; ++k) {
    cd s = 0;
    for (int i = 0; i < n; ++i) s += g[i] * std::polar(1.0, -2 * std::numbers::pi * k * i / n);
    ghat[k] = s / double(n);
  }
  Eigen::ArrayXd G = Eigen::ArrayXd::Zero(n);
  for (int k = 1; k < n; ++k) {
    const int kk = k <= n / 2 ? k : k - n;
    if (2 * k == n) continue;  // Nyquist mode has no odd antiderivative
    const cd c = ghat[k] / cd(0, 2 * std::numbers::pi * kk / L);
    for (int i = 0; i < n; ++i) G[i] += (c * std::polar(1.0, 2 * std::numbers::pi * k * i / n)).real();
  }
  return G;
}

std::string stage_error(const char* stage, const std::exception& e) {
  return std::string("solve_order_one [") + stage + "]: " + e.what();
}

}  // namespace

ProfileSet solve_order_one(const WkbExpansion& exp0, const ExtractionOptions& opt, const OrderOneInit& init,
                           OrderOneReport* report) {
  if (exp0.n() != 0) throw ProfileError("solve_order_one: order-0 expansion expected");
  const ProfileGrid& g = exp0.grid;
  const GroundState& gs = exp0.gs;
  const int nt = g.nt, n1 = g.x1.n, nX = g.fast.size();
  OrderOneReport rep;
  ProfileSet ps1;
  ps1.order = 1;
  ExtractionOptions lay = opt, reg = opt;
  lay.regular = false;
  reg.layer = false;

  // (i) non-polarized layer from the order-eps E2/E3 layer residual.
  try {
    const CascadeSource c = extract_cascade_source(1, exp0, lay);
    rep.stage_fit[0] = c.fit_residual;
    const LayerArray& S0 = exp0.profiles[0].U.layer[kS];
    LayerField src;
    src.layer[kVd] = LayerArray(nt, n1, 1, nX);
    src.layer[kP] = LayerArray(nt, n1, 1, nX);
    const double a0 = alpha(exp0.eos, gs.p_ref, gs.s_ref);
    for (int n = 0; n < nt; ++n)
      for (int i = 0; i < n1; ++i)
        for (int l = 0; l < nX; ++l) {
          const double S = S0.empty() ? 0.0 : S0(n, i, 0, l);
          src.layer[kVd](n, i, 0, l) = rho(exp0.eos, gs.p_ref, gs.s_ref + S) * c.layer[1](n, i, 0, l);
          src.layer[kP](n, i, 0, l) = a0 * c.layer[2](n, i, 0, l);
        }
    const LayerField np = integrate_nonpolarized(1, src, g);
    ps1.U.layer[kVd] = np.layer[kVd];
    ps1.U.layer[kP] = np.layer[kP];
    require_decay(ps1.U.layer[kVd], "order-1 V_d layer");
    require_decay(ps1.U.layer[kP], "order-1 P layer");
    if (init.Vd_tilde1) {
      const LayerArray req = sample_layer(g, init.Vd_tilde1, true);
      for (int i = 0; i < n1; ++i)
        for (int l = 0; l < nX; ++l)
          rep.init_conflict = std::max(rep.init_conflict, std::abs(req(0, i, 0, l) - ps1.U.layer[kVd](0, i, 0, l)));
    }
  } catch (const std::exception& e) {
    throw ProfileError(stage_error("non-polarized layer", e));
  }

  // (ii) regular corrector (V_bar^1, W_bar^2) with the order-eps^2 regular residual.
  try {
    const CascadeSource c = extract_cascade_source(2, exp0, reg);
    rep.stage_fit[1] = c.fit_residual;
    RegularProblem prob;
    for (int k = 0; k < 4; ++k) {
      prob.source[k] = c.regular[k];
      prob.source[k].data = -prob.source[k].data;
    }
    prob.wall_Vd = RegularArray(nt, n1, 1);
    for (int n = 0; n < nt; ++n)
      for (int i = 0; i < n1; ++i) prob.wall_Vd(n, i, 0) = -ps1.U.layer[kVd](n, i, 0, 0);
    // Divergence-free lift of the wall datum at t = 0.
    Eigen::ArrayXd g0(n1);
    for (int i = 0; i < n1; ++i) g0[i] = prob.wall_Vd(0, i, 0);
    const Eigen::ArrayXd G0 = periodic_antiderivative(g0, g.x1.len);
    const double h1 = g.x1.step(), lo = g.x1.lo;
    auto node = [h1, lo, n1](double x1) { return ((int(std::lround((x1 - lo) / h1)) % n1) + n1) % n1; };
    prob.init_Vd = [g0, node](double, double x1, double x2) { return g0[node(x1)] * std::exp(-x2); };
    prob.init_Vt = [G0, node](double, double x1, double x2) { return G0[node(x1)] * std::exp(-x2); };
    const RegularSolution sol = solve_regular_corrector(gs, exp0.eos, prob, g);
    for (int k = 0; k < 4; ++k) ps1.U.regular[k] = sol.U[k];
  } catch (const std::exception& e) {
    throw ProfileError(stage_error("regular corrector", e));
  }

  WkbExpansion exp1 = exp0;
  exp1.profiles.push_back(ps1);

  // (iii) entropy layer W_tilde^1 from the order-eps E4 layer residual.
  try {
    const CascadeSource c = extract_cascade_source(1, exp1, lay);
    rep.stage_fit[2] = c.fit_residual;
    LayerArray src = c.layer[3];
    src.data = -src.data;
    const LayerArray w0 = init.W_tilde1 ? sample_layer(g, init.W_tilde1, true) : LayerArray(1, n1, 1, nX);
    ps1.U.layer[kS] = transport_layer(gs, g, w0, &src, {});
    require_decay(ps1.U.layer[kS], "order-1 entropy layer");
  } catch (const std::exception& e) {
    throw ProfileError(stage_error("entropy layer", e));
  }
  exp1.profiles.back() = ps1;

  // (iv) tangential layer V_tilde_t^1 from the order-eps^2 E1 layer residual.
  try {
    const CascadeSource c = extract_cascade_source(2, exp1, lay);
    rep.stage_fit[3] = c.fit_residual;
    LayerArray src = c.layer[0];
    src.data = -src.data;
    const LayerArray b0 = init.Vt_tilde1 ? sample_layer(g, init.Vt_tilde1, true) : LayerArray(1, n1, 1, nX);
    auto k = [&gs](double t, double x1, double) { return gs.grad_v(t, x1, 0.0)(0, 0); };
    ps1.U.layer[kVt] = transport_layer(gs, g, b0, &src, k);
    require_decay(ps1.U.layer[kVt], "order-1 tangential layer");
  } catch (const std::exception& e) {
    throw ProfileError(stage_error("tangential layer", e));
  }
  if (report) *report = rep;
  return ps1;
}

WkbExpansion build_shear_expansion(int order, const ProfileGrid& grid, OrderOneReport* report, const Eos& eos) {
  if (order < 0 || order > 1) throw std::invalid_argument("build_shear_expansion: order must be 0 or 1");
  WkbExpansion e;
  e.gs = make_shear_ground_state();
  e.eos = eos;
  e.grid = grid;
  ProfileSet p0;
  p0.U.layer[kS] = solve_entropy_layer(
      e.gs, [](double x1, double, double X) { return std::exp(-X * X) * std::sin(x1); }, grid);
  p0.U.layer[kVt] = solve_tangential_layer(e.gs, e.eos, p0.U.layer[kS], RegularSolution{}, grid,
                                           [](double x1, double, double X) { return std::exp(-X * X) * std::cos(x1); });
  e.profiles.push_back(p0);
  if (order == 1) e.profiles.push_back(solve_order_one(e, {}, {}, report));
  return e;
}

WkbExpansion build_shear_with_regular(const ProfileGrid& grid, const Eos& eos) {
  WkbExpansion e;
  e.gs = make_shear_ground_state();
  e.eos = eos;
  e.grid = grid;
  const RegularSolution reg = solve_regular_corrector(
      e.gs, e.eos, [](double, double x1, double x2) { return std::cos(x1) * std::exp(-x2 * x2); }, FieldFn{}, grid);
  ProfileSet p0;
  for (int c = 0; c < 4; ++c) p0.U.regular[c] = reg.U[c];
  p0.U.layer[kS] = solve_entropy_layer(
      e.gs, [](double x1, double, double X) { return std::exp(-X * X) * std::sin(x1); }, grid);
  p0.U.layer[kVt] = solve_tangential_layer(e.gs, e.eos, p0.U.layer[kS], reg, grid,
                                           [](double x1, double, double X) { return std::exp(-X * X) * std::cos(x1); });
  e.profiles.push_back(p0);
  return e;
}

}  // namespace ebl
