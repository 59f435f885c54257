#include "ebl/wkb_assembler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace ebl {

WkbExpansion zero_layers(const WkbExpansion& exp) {
  WkbExpansion out = exp;
  for (auto& ps : out.profiles)
    for (auto& a : ps.U.layer) a = LayerArray();
  return out;
}

SpaceTimeGrid AssemblyGrid::space_time(const ProfileGrid& g) const {
  if (t_stride < 1 || (g.nt - 1) % t_stride != 0) throw GridError("AssemblyGrid: t_stride must divide nt - 1");
  if (x1_stride < 1 || g.x1.n % x1_stride != 0) throw GridError("AssemblyGrid: x1_stride must divide n1");
  SpaceTimeGrid sg;
  sg.t = Axis{0.0, g.T, (g.nt - 1) / t_stride + 1, false};
  sg.x1 = Axis{g.x1.lo + x1_offset * g.x1.step(), g.x1.len, g.x1.n / x1_stride, true};
  sg.x2 = x2;
  return sg;
}

AssemblyGrid residual_grid(const ProfileGrid& g, double eps, int per_eps, int t_stride, double height) {
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("residual_grid: eps outside (0, 1]");
  AssemblyGrid ag;
  ag.t_stride = t_stride;
  const int cells = int(std::lround(height * per_eps / eps));
  ag.x2 = Axis{0.0, height, cells + 1, false};
  (void)g;
  return ag;
}

Eigen::Vector4d evaluate_point(const WkbExpansion& exp, double eps, int n, int i, double x2) {
  const ProfileGrid& g = exp.grid;
  const double t = g.t(n), x1 = g.x1.at(i);
  const Vec2 v0 = exp.gs.v(t, x1, x2);
  Eigen::Vector4d u(v0(0), v0(1), exp.gs.p0(t, x1, x2), exp.gs.s0(t, x1, x2));
  const double X = x2 / eps;
  const bool in_layer = X <= g.fast.X_max();
  for (const ProfileSet& ps : exp.profiles) {
    const double e1 = std::pow(eps, ps.order + 1), e0 = std::pow(eps, ps.order);
    for (int c = 0; c < 4; ++c) {
      const double r = regular_at(ps.U.regular[c], g.x2_reg, n, i, x2);
      const double l = in_layer ? layer_at(ps.U.layer[c], g, n, i, x2, X) : 0.0;
      if (c == kS)
        u(c) += e1 * r + e0 * l;
      else
        u(c) += e1 * (r + l);
    }
  }
  return u;
}

StateField assemble(const WkbExpansion& exp, double eps, const AssemblyGrid& ag) {
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("assemble: eps outside (0, 1]");
  const SpaceTimeGrid sg = ag.space_time(exp.grid);
  if (ag.x2.step() > eps / 8 * (1 + 1e-12)) throw GridError("assemble: grid too coarse for eps (dx2 > eps/8)");
  StateField f(sg);
#pragma omp parallel for collapse(2) schedule(static)
  for (int a = 0; a < sg.t.n; ++a)
    for (int b = 0; b < sg.x1.n; ++b) {
      const int n = a * ag.t_stride, i = ag.x1_offset + b * ag.x1_stride;
      for (int j = 0; j < sg.x2.n; ++j) {
        const Eigen::Vector4d u = evaluate_point(exp, eps, n, i, sg.x2.at(j));
        const std::size_t k = sg.index(a, b, j);
        for (int c = 0; c < 4; ++c) f.comp[c][Eigen::Index(k)] = u(c);
      }
    }
  return f;
}

namespace {

double trap_weight(const Axis& ax, int k) {
  if (ax.periodic) return ax.step();
  return (k == 0 || k == ax.n - 1) ? 0.5 * ax.step() : ax.step();
}

}  // namespace

ResidualNorms residual_norms(const WkbExpansion& exp, double eps, const AssemblyGrid& ag) {
  const SpaceTimeGrid full = ag.space_time(exp.grid);
  const int n2 = full.x2.n;
  const int slab = 256;
  ResidualNorms out;
  std::array<double, 4> acc{};
  for (int j0 = 0; j0 < n2; j0 += slab) {
    const int j1 = std::min(n2, j0 + slab);  // owned [j0, j1)
    // Halo of one node on each interior side so centered differences match the full grid.
    const int b = std::min(n2, j1 + 1);
    int a = std::max(0, j0 - 1);
    if (b - a < 5) a = std::max(0, b - 5);
    AssemblyGrid sub = ag;
    sub.x2 = Axis{full.x2.at(a), full.x2.step() * (b - a - 1), b - a, false};
    const StateField u = assemble(exp, eps, sub);
    const StateField r = euler_residual(exp.eos, u);
    for (int tn = 0; tn < full.t.n; ++tn)
      for (int i = 0; i < full.x1.n; ++i)
        for (int j = j0; j < j1; ++j) {
          const double w = trap_weight(full.t, tn) * trap_weight(full.x1, i) * trap_weight(full.x2, j);
          const std::size_t k = r.grid.index(tn, i, j - a);
          for (int c = 0; c < 4; ++c) {
            const double v = r.comp[c][Eigen::Index(k)];
            acc[c] += w * v * v;
            out.linf = std::max(out.linf, std::abs(v));
          }
        }
  }
  double tot = 0;
  for (int c = 0; c < 4; ++c) {
    out.comp[c] = std::sqrt(acc[c]);
    tot += acc[c];
  }
  out.l2 = std::sqrt(tot);
  return out;
}

LoglogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 pairs");
  const int m = int(pairs.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd y(m);
  for (int k = 0; k < m; ++k) {
    if (!(pairs[k].first > 0) || !(pairs[k].second > 0))
      throw std::invalid_argument("fit_loglog_slope: non-positive value");
    A(k, 0) = std::log(pairs[k].first);
    A(k, 1) = 1.0;
    y(k) = std::log(pairs[k].second);
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd res = y - A * c;
  const double ss_tot = (y.array() - y.mean()).square().sum();
  LoglogFit f;
  f.slope = c(0);
  f.intercept = c(1);
  f.r2 = ss_tot > 0 ? 1.0 - res.squaredNorm() / ss_tot : 1.0;
  return f;
}

std::array<double, 4> l2_components(const StateField& f) {
  const SpaceTimeGrid& g = f.grid;
  std::array<double, 4> out{};
  for (int c = 0; c < 4; ++c) {
    double s = 0;
    for (int n = 0; n < g.t.n; ++n)
      for (int i = 0; i < g.x1.n; ++i)
        for (int j = 0; j < g.x2.n; ++j) {
          const double v = f.comp[c][Eigen::Index(g.index(n, i, j))];
          s += trap_weight(g.t, n) * trap_weight(g.x1, i) * trap_weight(g.x2, j) * v * v;
        }
    out[c] = std::sqrt(s);
  }
  return out;
}

double l2_norm(const StateField& f) {
  const auto c = l2_components(f);
  return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
}

double linf_norm(const StateField& f) {
  double m = 0;
  for (const auto& c : f.comp) m = std::max(m, c.abs().maxCoeff());
  return m;
}

SweepReport residual_sweep(const WkbExpansion& exp, const std::vector<double>& eps_list, const GridRule& rule) {
  if (eps_list.size() < 3) throw std::invalid_argument("residual_sweep: need at least 3 eps values");
  SweepReport rep;
  std::vector<std::pair<double, double>> l2, li;
  bool exact = true;
  for (double eps : eps_list) {
    const ResidualNorms r = residual_norms(exp, eps, residual_grid(exp.grid, eps, rule.per_eps, rule.t_stride));
    rep.rows.push_back(SweepRow{eps, 0, r.l2, r.linf, r.comp});
    l2.emplace_back(eps, std::max(r.l2, 1e-300));
    li.emplace_back(eps, std::max(r.linf, 1e-300));
    if (r.l2 > rule.exact_floor) exact = false;
    if (rule.refine_check) {
      const int ts = std::max(1, rule.t_stride / 2);
      const ResidualNorms rr = residual_norms(exp, eps, residual_grid(exp.grid, eps, 2 * rule.per_eps, ts));
      rep.rows.push_back(SweepRow{eps, 1, rr.l2, rr.linf, rr.comp});
      if (r.l2 > rule.exact_floor)
        rep.max_refinement_change = std::max(rep.max_refinement_change, std::abs(rr.l2 - r.l2) / r.l2);
    }
  }
  rep.exact = exact;
  if (!exact) {
    rep.fit = fit_loglog_slope(l2);
    rep.fit_inf = fit_loglog_slope(li);
  }
  return rep;
}

void write_sweep_csv(const SweepReport& rep, std::ostream& os) {
  os << "eps,grid_id,l2_residual,linf_residual,l2_v1,l2_v2,l2_p,l2_s\n";
  os.precision(10);
  for (const auto& r : rep.rows)
    os << r.eps << ',' << r.grid_id << ',' << r.l2 << ',' << r.linf << ',' << r.comp[0] << ',' << r.comp[1] << ','
       << r.comp[2] << ',' << r.comp[3] << '\n';
  if (rep.exact)
    os << "slope,exact,,,,,,\n";
  else
    os << "slope_l2," << rep.fit.slope << ',' << rep.fit.r2 << ",,,,,\n"
       << "slope_linf," << rep.fit_inf.slope << ',' << rep.fit_inf.r2 << ",,,,,\n";
}

K1Report check_nonsingular_reduction(const WkbExpansion& exp, const std::vector<double>& eps_list,
                                     const GridRule& rule) {
  K1Report rep;
  const GroundState& gs = exp.gs;
  const ProfileGrid& g = exp.grid;
  auto k1 = [&](const Eigen::Vector4d& u, double t, double x1, double x2) {
    const Vec2 v0 = gs.v(t, x1, x2);
    const Mat2 J = gs.grad_v(t, x1, x2);
    const Vec2 Xv = gs.dt_v(t, x1, x2) + J * u.head<2>();
    const double r = rho(exp.eos, u(2), u(3));
    Eigen::Vector3d k;
    k.head<2>() = r * Xv;
    k(2) = J.trace();
    (void)v0;
    return k;
  };
  for (double eps : eps_list) {
    const AssemblyGrid ag = residual_grid(g, eps, rule.per_eps, rule.t_stride);
    const SpaceTimeGrid sg = ag.space_time(g);
    double mx = 0, mg = 0;
#pragma omp parallel for collapse(2) schedule(static) reduction(max : mx, mg)
    for (int a = 0; a < sg.t.n; ++a)
      for (int b = 0; b < sg.x1.n; ++b) {
        const int n = a * ag.t_stride, i = b;
        const double t = g.t(n), x1 = g.x1.at(i);
        for (int j = 0; j < sg.x2.n; ++j) {
          const double x2 = sg.x2.at(j);
          const Eigen::Vector4d u = evaluate_point(exp, eps, n, i, x2);
          const Vec2 v0 = gs.v(t, x1, x2);
          const Eigen::Vector4d u0(v0(0), v0(1), gs.p0(t, x1, x2), gs.s0(t, x1, x2));
          const Eigen::Vector3d K0 = k1(u0, t, x1, x2);
          mx = std::max(mx, (k1(u, t, x1, x2) - K0).cwiseAbs().maxCoeff());
          mg = std::max(mg, K0.cwiseAbs().maxCoeff());
        }
      }
    rep.eps.push_back(eps);
    rep.ratio.push_back(mx / eps);
    rep.k1_ground = std::max(rep.k1_ground, mg);
  }
  const auto [lo, hi] = std::minmax_element(rep.ratio.begin(), rep.ratio.end());
  rep.spread = *lo > 0 ? *hi / *lo : (*hi > 0 ? 1e300 : 1.0);
  rep.pass = rep.spread <= 2.0;
  return rep;
}

PolarizationCheck check_polarization(const WkbExpansion& exp, double eps, double tol) {
  PolarizationCheck pc;
  if (exp.profiles.empty()) throw std::invalid_argument("check_polarization: order-0 profiles missing");
  const LayerField& U = exp.profiles[0].U;
  pc.max_violation = nonpolarized_mass(U);
  const ProfileGrid& g = exp.grid;
  const AssemblyGrid ag = residual_grid(g, eps);
  for (int n = 0; n < g.nt; n += 4)
    for (int i = 0; i < g.x1.n; ++i)
      for (int j = 0; j < ag.x2.n; ++j) {
        const double x2 = ag.x2.at(j), X = x2 / eps;
        if (X > g.fast.X_max()) break;
        for (int c : {int(kVd), int(kP)})
          pc.max_violation = std::max(pc.max_violation, std::abs(layer_at(U.layer[c], g, n, i, x2, X)));
      }
  pc.pass = pc.max_violation <= tol;
  return pc;
}

double h1_distance(const StateField& a, const StateField& b) {
  const SpaceTimeGrid& g = a.grid;
  if (g.size() != b.grid.size() || g.t.n != b.grid.t.n || g.x1.n != b.grid.x1.n || g.x2.n != b.grid.x2.n)
    throw GridError("h1_distance: grid mismatch");
  double s = 0;
  for (int c = 0; c < 4; ++c) {
    const Eigen::ArrayXd d = a.comp[c] - b.comp[c];
    std::array<Eigen::ArrayXd, 4> parts{d, Eigen::ArrayXd(), Eigen::ArrayXd(), Eigen::ArrayXd()};
    for (int ax = 0; ax < 3; ++ax)
      if (g.axis(ax).n >= 3) parts[ax + 1] = diff(d, g, ax);
    for (int n = 0; n < g.t.n; ++n)
      for (int i = 0; i < g.x1.n; ++i)
        for (int j = 0; j < g.x2.n; ++j) {
          const std::size_t k = g.index(n, i, j);
          const double w = (g.t.n > 1 ? trap_weight(g.t, n) : 1.0) * trap_weight(g.x1, i) * trap_weight(g.x2, j);
          for (const auto& p : parts)
            if (p.size()) s += w * p[Eigen::Index(k)] * p[Eigen::Index(k)];
        }
  }
  return std::sqrt(s);
}

}  // namespace ebl
