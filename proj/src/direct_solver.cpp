#include "ebl/direct_solver.hpp"

#include "ebl/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ebl {

namespace {

using Array4d = Eigen::Array4d;

double minmod(double a, double b) {
  if (a * b <= 0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

// Primitive w = (rho, v1, v2, p).
Array4d cons_from_rvp(const Array4d& w, double g) {
  const double r = w[0];
  return {r, r * w[1], r * w[2], w[3] / (g - 1) + 0.5 * r * (w[1] * w[1] + w[2] * w[2])};
}

Array4d rvp_from_cons(const Array4d& U, double g) {
  const double r = U[0], u = U[1] / r, v = U[2] / r;
  return {r, u, v, (g - 1) * (U[3] - 0.5 * r * (u * u + v * v))};
}

// Physical flux along axis d (0 = x1, 1 = x2) of primitive w.
Array4d flux(const Array4d& w, int d, double g) {
  const double un = w[1 + d], E = w[3] / (g - 1) + 0.5 * w[0] * (w[1] * w[1] + w[2] * w[2]);
  Array4d F(w[0] * un, w[0] * w[1] * un, w[0] * w[2] * un, (E + w[3]) * un);
  F[1 + d] += w[3];
  return F;
}

// HLLC with Davis wave speeds. Exact for contacts and shear layers at rest in the normal direction.
Array4d hllc(const Array4d& L, const Array4d& R, int d, double g) {
  const double rL = L[0], rR = R[0], pL = L[3], pR = R[3];
  const double uL = L[1 + d], uR = R[1 + d];
  const double cL = std::sqrt(g * pL / rL), cR = std::sqrt(g * pR / rR);
  const double SL = std::min(uL - cL, uR - cR), SR = std::max(uL + cL, uR + cR);
  if (SL >= 0) return flux(L, d, g);
  if (SR <= 0) return flux(R, d, g);
  const double S = (pR - pL + rL * uL * (SL - uL) - rR * uR * (SR - uR)) / (rL * (SL - uL) - rR * (SR - uR));
  const auto star = [&](const Array4d& w, double SK) {
    const Array4d U = cons_from_rvp(w, g);
    const double un = w[1 + d], f = w[0] * (SK - un) / (SK - S);
    Array4d Us(f, f * w[1], f * w[2], f * (U[3] / w[0] + (S - un) * (S + w[3] / (w[0] * (SK - un)))));
    Us[1 + d] = f * S;
    return (flux(w, d, g) + SK * (Us - U)).eval();
  };
  return S >= 0 ? star(L, SL) : star(R, SR);
}

bool admissible(const Array4d& w) { return w[0] > 0 && w[3] > 0 && w.allFinite(); }

// Padded primitive field with two ghost layers on every side.
struct Padded {
  int n1, n2, P2;
  Cells W;
  Padded(int a, int b) : n1(a), n2(b), P2(b + 4), W(4, (a + 4) * (b + 4)) {}
  Eigen::Index at(int i, int j) const { return Eigen::Index(i + 2) * P2 + (j + 2); }
};

void fill_ghosts(Padded& P) {
  for (int i = 0; i < P.n1; ++i)
    for (int k = 1; k <= 2; ++k) {
      P.W.col(P.at(i, -k)) = P.W.col(P.at(i, k - 1));
      P.W(2, P.at(i, -k)) = -P.W(2, P.at(i, k - 1));
      P.W.col(P.at(i, P.n2 - 1 + k)) = P.W.col(P.at(i, P.n2 - 1));
    }
  for (int k = 1; k <= 2; ++k)
    for (int j = -2; j < P.n2 + 2; ++j) {
      P.W.col(P.at(-k, j)) = P.W.col(P.at(P.n1 - k, j));
      P.W.col(P.at(P.n1 - 1 + k, j)) = P.W.col(P.at(k - 1, j));
    }
}

double max_rate(const Padded& P, double g, double dx1, double dx2, double* vmax, double* smax) {
  double rate = 0, vm = 0, sm = 0;
  for (int i = 0; i < P.n1; ++i)
    for (int j = 0; j < P.n2; ++j) {
      const auto w = P.W.col(P.at(i, j));
      const double c = std::sqrt(g * w[3] / w[0]);
      rate = std::max(rate, (std::abs(w[1]) + c) / dx1 + (std::abs(w[2]) + c) / dx2);
      vm = std::max(vm, std::hypot(w[1], w[2]));
      sm = std::max(sm, std::abs(w[2]) + c);
    }
  *vmax = vm;
  *smax = sm;
  return rate;
}

struct StepResult {
  double change = 0, outflow = 0;
};

// One MUSCL-Hancock step on U (interior cells), primitive field P already filled.
StepResult step(Cells& U, Padded& P, double dt, double g, double dx1, double dx2) {
  const int n1 = P.n1, n2 = P.n2;
  const int P1 = n1 + 4, P2 = P.P2;
  Cells Sx = Cells::Zero(4, Eigen::Index(P1) * P2), Sy = Sx, Wb = P.W;
  const double ax = 0.5 * dt / dx1, ay = 0.5 * dt / dx2;
#pragma omp parallel for schedule(static)
  for (int i = -1; i <= n1; ++i)
    for (int j = -1; j <= n2; ++j) {
      const Eigen::Index k = P.at(i, j);
      const Array4d w = P.W.col(k);
      Array4d sx, sy;
      for (int c = 0; c < 4; ++c) {
        sx[c] = minmod(w[c] - P.W(c, P.at(i - 1, j)), P.W(c, P.at(i + 1, j)) - w[c]);
        sy[c] = minmod(w[c] - P.W(c, P.at(i, j - 1)), P.W(c, P.at(i, j + 1)) - w[c]);
      }
      const double r = w[0], u = w[1], v = w[2], p = w[3];
      Array4d b;
      b[0] = r - ax * (u * sx[0] + r * sx[1]) - ay * (v * sy[0] + r * sy[2]);
      b[1] = u - ax * (u * sx[1] + sx[3] / r) - ay * (v * sy[1]);
      b[2] = v - ax * (u * sx[2]) - ay * (v * sy[2] + sy[3] / r);
      b[3] = p - ax * (u * sx[3] + g * p * sx[1]) - ay * (v * sy[3] + g * p * sy[2]);
      const bool ok = admissible(b) && admissible(b - 0.5 * sx.abs()) && admissible(b - 0.5 * sy.abs());
      if (ok) {
        Wb.col(k) = b;
        Sx.col(k) = sx;
        Sy.col(k) = sy;
      }  // otherwise first order in this cell
    }

  // Face fluxes: Fx(i, j) at x1-face i + 1/2 for i in [-1, n1), Fy(i, j) at x2-face j + 1/2 for j in [-1, n2).
  Cells Fx(4, Eigen::Index(n1 + 1) * n2), Fy(4, Eigen::Index(n1) * (n2 + 1));
#pragma omp parallel for schedule(static)
  for (int i = -1; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const Array4d L = Wb.col(P.at(i, j)) + 0.5 * Sx.col(P.at(i, j));
      const Array4d R = Wb.col(P.at(i + 1, j)) - 0.5 * Sx.col(P.at(i + 1, j));
      Fx.col(Eigen::Index(i + 1) * n2 + j) = hllc(L, R, 0, g);
    }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n1; ++i)
    for (int j = -1; j < n2; ++j) {
      const Array4d L = Wb.col(P.at(i, j)) + 0.5 * Sy.col(P.at(i, j));
      const Array4d R = Wb.col(P.at(i, j + 1)) - 0.5 * Sy.col(P.at(i, j + 1));
      Fy.col(Eigen::Index(i) * (n2 + 1) + j + 1) = hllc(L, R, 1, g);
    }

  StepResult out;
  const double lx = dt / dx1, ly = dt / dx2;
  double change = 0;
#pragma omp parallel for schedule(static) reduction(max : change)
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const Array4d dU = -lx * (Fx.col(Eigen::Index(i + 1) * n2 + j) - Fx.col(Eigen::Index(i) * n2 + j)) -
                         ly * (Fy.col(Eigen::Index(i) * (n2 + 1) + j + 1) - Fy.col(Eigen::Index(i) * (n2 + 1) + j));
      U.col(Eigen::Index(i) * n2 + j) += dU;
      change = std::max(change, dU.abs().maxCoeff());
    }
  out.change = change;
  for (int i = 0; i < n1; ++i) out.outflow += Fy(0, Eigen::Index(i) * (n2 + 1) + n2) * dt * dx1;
  return out;
}

void load(Padded& P, const Cells& U, double g) {
  for (int i = 0; i < P.n1; ++i)
    for (int j = 0; j < P.n2; ++j) P.W.col(P.at(i, j)) = rvp_from_cons(U.col(Eigen::Index(i) * P.n2 + j), g);
  fill_ghosts(P);
}

// Keeps the first n2 nodes in x2.
StateField lower_part(const StateField& f, int n2) {
  const SpaceTimeGrid& g = f.grid;
  SpaceTimeGrid h = g;
  h.x2 = Axis{g.x2.lo, g.x2.step() * (n2 - 1), n2, false};
  StateField out(h);
  for (int n = 0; n < g.t.n; ++n)
    for (int i = 0; i < g.x1.n; ++i)
      for (int c = 0; c < 4; ++c)
        out.comp[c].segment(Eigen::Index(h.index(n, i, 0)), n2) = f.comp[c].segment(Eigen::Index(g.index(n, i, 0)), n2);
  return out;
}

double trap(const Axis& ax, int k) {
  if (ax.periodic) return ax.step();
  return (k == 0 || k == ax.n - 1) ? 0.5 * ax.step() : ax.step();
}

}  // namespace

void SimGrid::validate() const {
  if (n1 < 4 || n2 < 4) throw GridError("SimGrid: need at least 4 cells per direction");
  if (!(L1 > 0) || !(H > 0)) throw GridError("SimGrid: non-positive extent");
  if (!(cfl > 0) || cfl > 0.45) throw GridError("SimGrid: cfl must lie in (0, 0.45]");
}

Eigen::Array4d to_conservative(const Eos& eos, const Eigen::Array4d& w) {
  const double r = rho(eos, w[2], w[3]);
  return cons_from_rvp(Array4d(r, w[0], w[1], w[2]), eos.gamma);
}

Eigen::Array4d to_primitive(const Eos& eos, const Eigen::Array4d& U) {
  const Array4d w = rvp_from_cons(U, eos.gamma);
  if (!(w[0] > 0)) throw AdmissibilityError("to_primitive: non-positive density");
  require_admissible(eos, w[3]);
  return {w[1], w[2], w[3], std::log(w[3] / std::pow(w[0], eos.gamma))};
}

ConservativeState init_from_wkb(const WkbExpansion& exp, double eps, const SimGrid& grid) {
  grid.validate();
  if (grid.dx2() > eps / 8 * (1 + 1e-12)) throw GridError("init_from_wkb: dx2 > eps/8");
  for (int i = 0; i < exp.grid.x1.n; ++i)
    if (std::abs(evaluate_point(exp, eps, 0, i, 0.0)[1]) > 1e-12)
      throw std::invalid_argument("init_from_wkb: initial normal velocity nonzero on the wall");
  const StateField ua = wkb_on_cells(exp, eps, grid, 1, true);
  ConservativeState s{grid, Cells(4, grid.cells())};
  for (Eigen::Index k = 0; k < s.U.cols(); ++k)
    s.U.col(k) = to_conservative(exp.eos, Array4d(ua.comp[0][k], ua.comp[1][k], ua.comp[2][k], ua.comp[3][k]));
  return s;
}

Trajectory run(const ConservativeState& init, const Eos& eos, const std::vector<double>& times) {
  const SimGrid& G = init.grid;
  G.validate();
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] < 0 || (k && times[k] <= times[k - 1])) throw std::invalid_argument("run: times must increase from 0");
  const double g = eos.gamma, dx1 = G.dx1(), dx2 = G.dx2();
  Trajectory tr;
  tr.stats.mass0 = init.mass();
  Cells U = init.U;
  Padded P(G.n1, G.n2);
  double t = 0, outflow = 0;
  const double t_end = times.empty() ? 0.0 : times.back();
  std::size_t next = 0;
  RunStats& st = tr.stats;
  while (next < times.size()) {
    load(P, U, g);
    double vmax = 0, smax = 0;
    const double rate = max_rate(P, g, dx1, dx2, &vmax, &smax);
    st.max_speed = std::max(st.max_speed, smax);
    for (int i = 0; i < G.n1; ++i) {
      const double trace = 1.5 * P.W(2, P.at(i, 0)) - 0.5 * P.W(2, P.at(i, 1));
      if (vmax > 0) st.wall_trace_ratio = std::max(st.wall_trace_ratio, std::abs(trace) / vmax);
    }
    if (t >= times[next] - 1e-13 * std::max(1.0, t_end)) {
      tr.times.push_back(times[next]);
      tr.snapshots.push_back(ConservativeState{G, U});
      ++next;
      continue;
    }
    double dt = G.cfl / rate;
    if (!std::isfinite(dt) || dt < 1e-12 * std::max(1.0, t_end)) throw SolverError("run: time step stalled");
    const bool last = t + dt >= times[next];
    if (last) dt = times[next] - t;
    const StepResult r = step(U, P, dt, g, dx1, dx2);
    t = last ? times[next] : t + dt;
    outflow += r.outflow;
    st.max_step_change = std::max(st.max_step_change, r.change);
    ++st.steps;
    double min_r = 1e300, min_p = 1e300;
    for (Eigen::Index k = 0; k < U.cols(); ++k) {
      const Array4d w = rvp_from_cons(U.col(k), g);
      min_r = std::min(min_r, w[0]);
      min_p = std::min(min_p, w[3]);
    }
    if (!(min_r > 0) || !(min_p > eos.p_min))
      throw SolverError("run: positivity lost at t = " + std::to_string(t));
    st.min_rho = st.steps == 1 ? min_r : std::min(st.min_rho, min_r);
    st.min_p = st.steps == 1 ? min_p : std::min(st.min_p, min_p);
  }
  const double m1 = tr.snapshots.empty() ? st.mass0 : tr.snapshots.back().mass();
  st.outflow = outflow;
  st.mass_change = std::abs(m1 - st.mass0) / st.mass0;
  st.mass_defect = std::abs(m1 - st.mass0 + outflow) / st.mass0;
  return tr;
}

StateField to_state_field(const Eos& eos, const Trajectory& traj) {
  if (traj.snapshots.empty()) throw std::invalid_argument("to_state_field: empty trajectory");
  const SimGrid& G = traj.snapshots.front().grid;
  const int nt = int(traj.times.size());
  const double t0 = traj.times.front(), span = traj.times.back() - t0;
  for (int n = 0; n < nt; ++n)
    if (std::abs(traj.times[n] - (t0 + (nt > 1 ? span * n / (nt - 1) : 0.0))) > 1e-12 * std::max(1.0, span))
      throw GridError("to_state_field: snapshot times are not uniform");
  SpaceTimeGrid sg{Axis{t0, span, nt, false}, Axis{0.5 * G.dx1(), G.L1, G.n1, true},
                   Axis{0.5 * G.dx2(), G.H - G.dx2(), G.n2, false}};
  StateField f(sg);
  for (int n = 0; n < nt; ++n)
    for (int i = 0; i < G.n1; ++i)
      for (int j = 0; j < G.n2; ++j) {
        const Array4d w = to_primitive(eos, traj.snapshots[n].U.col(Eigen::Index(i) * G.n2 + j));
        for (int c = 0; c < 4; ++c) f.comp[c][Eigen::Index(sg.index(n, i, j))] = w[c];
      }
  return f;
}

StateField wkb_on_cells(const WkbExpansion& exp, double eps, const SimGrid& grid, int t_stride, bool first_only) {
  const ProfileGrid& pg = exp.grid;
  if (std::abs(pg.x1.len - grid.L1) > 1e-12 * grid.L1 || pg.x1.lo != 0.0)
    throw GridError("wkb_on_cells: x1 period differs from the profile grid");
  if (grid.H > pg.x2_reg.hi() + 1e-12) throw GridError("wkb_on_cells: strip higher than the regular grid");
  const int N = pg.x1.n;
  const double h = pg.x1.step();
  AssemblyGrid ag;
  ag.t_stride = first_only ? pg.nt - 1 : t_stride;
  ag.x2 = Axis{0.5 * grid.dx2(), grid.H - grid.dx2(), grid.n2, false};
  if (N % grid.n1 == 0 && (N / grid.n1) % 2 == 0) {  // centres on profile nodes
    ag.x1_stride = N / grid.n1;
    ag.x1_offset = ag.x1_stride / 2;
  }
  const StateField nodes = assemble(exp, eps, ag);
  const int nt = first_only ? 1 : nodes.grid.t.n;
  SpaceTimeGrid sg{Axis{0.0, first_only ? 0.0 : pg.T, nt, false}, Axis{0.5 * grid.dx1(), grid.L1, grid.n1, true},
                   ag.x2};
  StateField out(sg);
  const int n2 = grid.n2;
  for (int i = 0; i < grid.n1; ++i) {
    int idx[6];
    double w[6];
    if (ag.x1_stride > 1) {
      std::fill(w, w + 6, 0.0);
      idx[0] = i;
      w[0] = 1.0;
    } else {
      const double q = grid.x1(i) / h;
      const int base = int(std::floor(q));
      double xs[6];
      for (int m = 0; m < 6; ++m) {
        xs[m] = base - 2 + m;
        idx[m] = ((base - 2 + m) % N + N) % N;
      }
      lagrange_weights(xs, 6, q, w);
    }
    for (int n = 0; n < nt; ++n)
      for (int c = 0; c < 4; ++c) {
        auto dst = out.comp[c].segment(Eigen::Index(sg.index(n, i, 0)), n2);
        dst.setZero();
        for (int m = 0; m < 6; ++m)
          if (w[m] != 0.0) dst += w[m] * nodes.comp[c].segment(Eigen::Index(nodes.grid.index(n, idx[m], 0)), n2);
      }
  }
  return out;
}

std::vector<double> snapshot_times(const ProfileGrid& pg, int t_stride) {
  if (t_stride < 1 || (pg.nt - 1) % t_stride != 0) throw GridError("snapshot_times: t_stride must divide nt - 1");
  std::vector<double> t;
  for (int n = 0; n < pg.nt; n += t_stride) t.push_back(pg.t(n));
  return t;
}

Trajectory trajectory_from_wkb(const WkbExpansion& exp, double eps, const SimGrid& grid, int t_stride) {
  const StateField ua = wkb_on_cells(exp, eps, grid, t_stride);
  Trajectory tr;
  tr.times = snapshot_times(exp.grid, t_stride);
  for (int n = 0; n < ua.grid.t.n; ++n) {
    ConservativeState s{grid, Cells(4, grid.cells())};
    for (int i = 0; i < grid.n1; ++i)
      for (int j = 0; j < grid.n2; ++j) {
        const std::size_t k = ua.grid.index(n, i, j);
        const Array4d w(ua.comp[0][Eigen::Index(k)], ua.comp[1][Eigen::Index(k)], ua.comp[2][Eigen::Index(k)],
                        ua.comp[3][Eigen::Index(k)]);
        s.U.col(Eigen::Index(i) * grid.n2 + j) = to_conservative(exp.eos, w);
      }
    tr.snapshots.push_back(std::move(s));
  }
  tr.stats.mass0 = tr.snapshots.front().mass();
  return tr;
}

H1Report compare_h1(const Trajectory& traj, const WkbExpansion& exp, double eps, int t_stride, double height) {
  if (traj.snapshots.empty()) throw GridError("compare_h1: empty trajectory");
  const SimGrid& G = traj.snapshots.front().grid;
  const std::vector<double> times = snapshot_times(exp.grid, t_stride);
  if (times.size() != traj.times.size()) throw GridError("compare_h1: grid mismatch (snapshot count)");
  for (std::size_t n = 0; n < times.size(); ++n)
    if (std::abs(times[n] - traj.times[n]) > 1e-12) throw GridError("compare_h1: grid mismatch (snapshot times)");
  if (height <= 0) height = G.H - traj.stats.max_speed * (times.back() - times.front());
  const int n2 = std::min(G.n2, int(std::floor(height / G.dx2() - 0.5 + 1e-9)) + 1);
  if (n2 < 3) throw GridError("compare_h1: comparison region below three cells");
  const StateField ua = lower_part(wkb_on_cells(exp, eps, G, t_stride), n2);
  const StateField u = lower_part(to_state_field(exp.eos, traj), n2);
  H1Report rep;
  rep.height = height;
  rep.h1 = h1_distance(u, ua);
  rep.times = times;
  const SpaceTimeGrid& sg = u.grid;
  for (int n = 0; n < sg.t.n; ++n) {
    double s = 0;
    for (int i = 0; i < sg.x1.n; ++i)
      for (int j = 0; j < sg.x2.n; ++j) {
        const Eigen::Index k = Eigen::Index(sg.index(n, i, j));
        double d2 = 0;
        for (int c = 0; c < 4; ++c) d2 += std::pow(u.comp[c][k] - ua.comp[c][k], 2);
        s += trap(sg.x1, i) * trap(sg.x2, j) * d2;
      }
    rep.l2.push_back(std::sqrt(s));
  }
  return rep;
}

SimGrid SimGridRule::grid(double eps, bool refined) const {
  const int f = refined ? 2 : 1;
  SimGrid g;
  g.n1 = n1 * f;
  g.n2 = int(std::lround(per_eps * f * H / eps));
  g.H = H;
  g.cfl = cfl;
  if (g.n1 > max_n1 || g.n2 > max_n2) throw GridError("SimGridRule: grid exceeds the desk-scale caps");
  return g;
}

StabilityReport stability_sweep(const WkbExpansion& exp, const std::vector<double>& eps_list,
                                const SimGridRule& rule) {
  StabilityReport rep;
  const std::vector<double> times = snapshot_times(exp.grid, rule.t_stride);
  std::vector<std::pair<double, double>> base;
  rep.complete = true;
  for (double eps : eps_list) {
    double h1_base = -1;
    for (int refined = 0; refined <= (rule.refine_check ? 1 : 0); ++refined) {
      StabilityRow row;
      row.eps = eps;
      row.grid_id = refined;
      try {
        const ConservativeState s0 = init_from_wkb(exp, eps, rule.grid(eps, refined));
        const Trajectory tr = run(s0, exp.eos, times);
        const H1Report h = compare_h1(tr, exp, eps, rule.t_stride);
        row.h1 = h.h1;
        row.h1_scaled = h.h1 * std::pow(eps, -rule.M);
        row.l2_final = h.l2.back();
        row.height = h.height;
        row.stats = tr.stats;
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
        rep.complete = false;
      }
      if (row.status == "ok") {
        if (!refined) {
          h1_base = row.h1;
          base.emplace_back(eps, row.h1);
        } else if (h1_base > 0) {
          rep.max_refinement_change = std::max(rep.max_refinement_change, std::abs(row.h1 - h1_base) / h1_base);
        }
      }
      rep.rows.push_back(row);
    }
  }
  std::sort(base.begin(), base.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  rep.monotone = base.size() >= 2;
  for (std::size_t k = 1; k < base.size(); ++k) rep.monotone = rep.monotone && base[k].second < base[k - 1].second;
  const bool positive = std::all_of(base.begin(), base.end(), [](const auto& b) { return b.second > 0; });
  if (base.size() >= 3 && positive) rep.fit = fit_loglog_slope(base);
  return rep;
}

void write_stability_csv(const StabilityReport& rep, std::ostream& os) {
  os << "eps,grid_id,h1,h1_scaled,l2_final,height,steps,mass_defect,wall_trace_ratio,status\n";
  os.precision(10);
  for (const auto& r : rep.rows)
    os << r.eps << ',' << r.grid_id << ',' << r.h1 << ',' << r.h1_scaled << ',' << r.l2_final << ',' << r.height << ','
       << r.stats.steps << ',' << r.stats.mass_defect << ',' << r.stats.wall_trace_ratio << ',' << r.status << '\n';
  os << "slope," << rep.fit.slope << ",r2," << rep.fit.r2 << ",monotone," << (rep.monotone ? 1 : 0)
     << ",refinement_change," << rep.max_refinement_change << ",\n";
}

void write_snapshot(const std::string& path, const Eos& eos, const ConservativeState& s) {
  const SimGrid& G = s.grid;
  FlatField f;
  f.axes = {{0, 1, 2, 3}, std::vector<double>(G.n1), std::vector<double>(G.n2)};
  for (int i = 0; i < G.n1; ++i) f.axes[1][i] = G.x1(i);
  for (int j = 0; j < G.n2; ++j) f.axes[2][j] = G.x2(j);
  f.data.resize(4 * Eigen::Index(G.cells()));
  for (int i = 0; i < G.n1; ++i)
    for (int j = 0; j < G.n2; ++j) {
      const Array4d w = to_primitive(eos, s.U.col(Eigen::Index(i) * G.n2 + j));
      for (int c = 0; c < 4; ++c) f.data[Eigen::Index(c) * G.cells() + Eigen::Index(i) * G.n2 + j] = w[c];
    }
  write_flat_field(path, f);
}

}  // namespace ebl
