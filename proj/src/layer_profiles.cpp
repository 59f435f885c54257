#include "ebl/layer_profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ebl {

double tail_ratio(const LayerArray& a) {
  if (a.empty()) return 0.0;
  double tail = 0.0;
  const double mx = a.data.abs().maxCoeff();
  if (mx == 0.0) return 0.0;
  for (int n = 0; n < a.nt; ++n)
    for (int i = 0; i < a.n1; ++i)
      for (int j = 0; j < a.n2; ++j) tail = std::max(tail, std::abs(a(n, i, j, a.nX - 1)));
  return tail / mx;
}

void require_decay(const LayerArray& a, const std::string& what, double tol) {
  const double r = tail_ratio(a);
  if (r > tol) {
    std::ostringstream os;
    os << what << ": decay lost, tail ratio " << r << " > " << tol;
    throw ProfileError(os.str());
  }
}

LayerArray sample_layer(const ProfileGrid& g, const InitFn& f, bool inner) {
  const int n2 = inner ? 1 : g.x2_layer.n;
  LayerArray a(1, g.x1.n, n2, g.fast.size());
  for (int i = 0; i < g.x1.n; ++i)
    for (int j = 0; j < n2; ++j)
      for (int l = 0; l < a.nX; ++l) a(0, i, j, l) = f(g.x1.at(i), inner ? 0.0 : g.x2_layer.at(j), g.fast.node(l));
  return a;
}

int x2_stencil(const Axis& ax, double x2, int k, double* w, double* dw) {
  const double h = ax.step();
  int j0 = int(std::floor((x2 - ax.lo) / h)) - (k - 1) / 2;
  j0 = std::clamp(j0, 0, ax.n - k);
  double xs[8];
  for (int m = 0; m < k; ++m) xs[m] = ax.at(j0 + m);
  if (dw)
    lagrange_weights_d(xs, k, x2, w, dw);
  else
    lagrange_weights(xs, k, x2, w);
  return j0;
}

double periodic_d1(const double* f, std::ptrdiff_t s, int n, double h, int i) {
  auto F = [&](int k) { return f[std::ptrdiff_t(((i + k) % n + n) % n) * s]; };
  return (-F(-3) + 9 * F(-2) - 45 * F(-1) + 45 * F(1) - 9 * F(2) + F(3)) / (60 * h);
}

double regular_at(const RegularArray& a, const Axis& ax, int n, int i, double x2) {
  if (a.empty()) return 0.0;
  if (a.n2 == 1) return a(n, i, 0);
  double w[4];
  const int j0 = x2_stencil(ax, x2, 4, w);
  double s = 0;
  for (int m = 0; m < 4; ++m) s += w[m] * a(n, i, j0 + m);
  return s;
}

namespace {
/// Hermite evaluation along X for the line (n, i, j).
double layer_line_at(const LayerArray& a, const FastGrid& fg, int n, int i, int j, double X) {
  if (X >= fg.X_max()) return X == fg.X_max() ? a(n, i, j, a.nX - 1) : 0.0;
  const double* f = a.data.data() + a.index(n, i, j, 0);
  int l = std::min(int(fg.q_of(X) / fg.dq()), a.nX - 2);
  const double x0 = fg.node(l), x1 = fg.node(l + 1), h = x1 - x0, u = (X - x0) / h;
  const double d0 = fg.derivative_at(f, 1, l), d1 = fg.derivative_at(f, 1, l + 1);
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * f[l] + h10 * h * d0 + h01 * f[l + 1] + h11 * h * d1;
}
}  // namespace

double layer_at(const LayerArray& a, const ProfileGrid& g, int n, int i, double x2, double X) {
  if (a.empty() || X > g.fast.X_max()) return 0.0;
  if (a.n2 == 1) return layer_line_at(a, g.fast, n, i, 0, X);
  double w[4];
  const int j0 = x2_stencil(g.x2_layer, x2, 4, w);
  double s = 0;
  for (int m = 0; m < 4; ++m) s += w[m] * layer_line_at(a, g.fast, n, i, j0 + m, X);
  return s;
}

namespace {

/// Three-point quadratic stencil around fractional index q on [0, n-1] (clamped) or periodic.
struct Stencil3 {
  int idx[3];
  double w[3];
};

Stencil3 quad_stencil(double q, int n, bool periodic) {
  Stencil3 s;
  int c = int(std::lround(q));
  if (!periodic) c = std::clamp(c, 1, n - 2);
  const double u = q - c;
  s.w[0] = 0.5 * u * (u - 1);
  s.w[1] = 1 - u * u;
  s.w[2] = 0.5 * u * (u + 1);
  for (int m = 0; m < 3; ++m) s.idx[m] = periodic ? ((c - 1 + m) % n + n) % n : c - 1 + m;
  return s;
}

}  // namespace

LayerArray transport_layer(const GroundState& gs, const ProfileGrid& grid, const LayerArray& init,
                           const LayerArray* source, const FieldFn& k) {
  const int n1 = grid.x1.n, nX = grid.fast.size(), nt = grid.nt;
  const int n2 = init.n2;
  const bool inner = n2 == 1;
  if (init.n1 != n1 || init.nX != nX || (!inner && n2 != grid.x2_layer.n))
    throw ProfileError("transport_layer: init does not match the grid");
  if (source && !source->empty() && (source->nt != nt || source->n2 != n2 || source->n1 != n1))
    throw ProfileError("transport_layer: source does not match the grid");
  const bool has_src = source && !source->empty();
  const auto vflat = normal_flat_factor(gs);
  const int sub = std::max(1, grid.substeps);
  const double tau = grid.dt() / sub;
  const double h1 = grid.x1.step(), h2 = inner ? 1.0 : grid.x2_layer.step();
  const std::size_t slice = std::size_t(n1) * n2 * nX;

  LayerArray out(nt, n1, n2, nX);
  out.data.head(Eigen::Index(slice)) = init.data.head(Eigen::Index(slice));
  Eigen::ArrayXd cur = init.data.head(Eigen::Index(slice));
  Eigen::ArrayXd next = Eigen::ArrayXd::Zero(Eigen::Index(slice));
  Eigen::ArrayXd src0, src1;
  auto source_at = [&](double t, Eigen::ArrayXd& f) {
    if (!has_src) return;
    const double s = t / grid.dt();
    int n = std::min(int(std::floor(s)), nt - 2);
    const double th = s - n;
    f = (1 - th) * source->data.segment(Eigen::Index(n * slice), Eigen::Index(slice)) +
        th * source->data.segment(Eigen::Index((n + 1) * slice), Eigen::Index(slice));
  };
  auto vel = [&](double t, double x1, double x2) -> Vec2 {
    const Vec2 v = gs.v(t, x1, x2);
    return inner ? Vec2(v(0), 0.0) : v;
  };
  if (has_src) source_at(0.0, src0);

  for (int step = 0; step < (nt - 1) * sub; ++step) {
    const double t0 = step * tau, t1 = t0 + tau;
    if (has_src) source_at(t1, src1);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) {
        const double x1 = grid.x1.at(i), x2 = inner ? 0.0 : grid.x2_layer.at(j);
        // Backward midpoint trace of the x characteristic.
        const Vec2 a = vel(t1, x1, x2);
        const double xm1 = x1 - 0.5 * tau * a(0), xm2 = x2 - 0.5 * tau * a(1);
        const Vec2 b = vel(t1 - 0.5 * tau, xm1, inner ? 0.0 : xm2);
        const double f1 = x1 - tau * b(0), f2 = inner ? 0.0 : x2 - tau * b(1);
        const double shrink = std::exp(-tau * vflat(t1 - 0.5 * tau, xm1, inner ? 0.0 : xm2));
        const Stencil3 s1 = quad_stencil((f1 - grid.x1.lo) / h1, n1, true);
        Stencil3 s2{{0, 0, 0}, {1, 0, 0}};
        if (!inner) s2 = quad_stencil((f2 - grid.x2_layer.lo) / h2, n2, false);
        const int m2 = inner ? 1 : 3;
        const double k0 = k ? k(t0, f1, f2) : 0.0, k1 = k ? k(t1, x1, x2) : 0.0;
        for (int l = 0; l < nX; ++l) {
          const double Xf = grid.fast.node(l) * shrink;
          double u0 = 0, g0 = 0;
          if (Xf <= grid.fast.X_max()) {
            const Stencil3 s3 = quad_stencil(grid.fast.q_of(Xf) / grid.fast.dq(), nX, false);
            for (int a1 = 0; a1 < 3; ++a1)
              for (int a2 = 0; a2 < m2; ++a2)
                for (int a3 = 0; a3 < 3; ++a3) {
                  const double w = s1.w[a1] * s2.w[a2] * s3.w[a3];
                  const std::size_t id = (std::size_t(s1.idx[a1]) * n2 + s2.idx[a2]) * nX + s3.idx[a3];
                  u0 += w * cur[Eigen::Index(id)];
                  if (has_src) g0 += w * src0[Eigen::Index(id)];
                }
          }
          const std::size_t id = (std::size_t(i) * n2 + j) * nX + l;
          const double g1 = has_src ? src1[Eigen::Index(id)] : 0.0;
          next[Eigen::Index(id)] = (u0 * (1 - 0.5 * tau * k0) + 0.5 * tau * (g0 + g1)) / (1 + 0.5 * tau * k1);
        }
      }
    }
    cur.swap(next);
    if (has_src) src0.swap(src1);
    if ((step + 1) % sub == 0) {
      const int n = (step + 1) / sub;
      out.data.segment(Eigen::Index(n * slice), Eigen::Index(slice)) = cur;
    }
  }
  return out;
}

LayerArray solve_entropy_layer(const GroundState& gs, const InitFn& init, const ProfileGrid& grid) {
  LayerArray out = transport_layer(gs, grid, sample_layer(grid, init), nullptr, {});
  require_decay(out, "solve_entropy_layer");
  return out;
}

// ---------------------------------------------------------------------------
// Regular corrector.

namespace {

struct Acoustic {
  // A_k^{+-} = sum_m max/min(v_k + lambda_m, 0) P_{k,m}
  std::array<Eigen::Vector4d, 2> lambda;
  std::array<std::array<Eigen::Matrix4d, 4>, 2> proj;
};

Acoustic acoustic_split(double rho0, double alpha0) {
  Acoustic ac;
  for (int k = 0; k < 2; ++k) {
    Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
    K(k, 2) = 1.0 / rho0;
    K(2, k) = 1.0 / alpha0;
    Eigen::EigenSolver<Eigen::Matrix4d> es(K);
    const Eigen::Matrix4d R = es.eigenvectors().real();
    const Eigen::Matrix4d Ri = R.inverse();
    ac.lambda[k] = es.eigenvalues().real();
    for (int m = 0; m < 4; ++m) ac.proj[k][m] = R.col(m) * Ri.row(m);
  }
  return ac;
}

struct RegularOp {
  const GroundState& gs;
  const RegularProblem& prob;
  const ProfileGrid& grid;
  Acoustic ac;
  int n1, n2;
  double h1, h2;

  std::size_t id(int i, int j) const { return std::size_t(i) * n2 + j; }

  double wall(double t, int i) const {
    if (prob.wall_Vd.empty()) return 0.0;
    const double s = t / grid.dt();
    const int n = std::min(int(std::floor(s)), grid.nt - 2);
    const double th = s - n;
    return (1 - th) * prob.wall_Vd(n, i, 0) + th * prob.wall_Vd(n + 1, i, 0);
  }

  double source(int c, double t, int i, int j) const {
    const RegularArray& F = prob.source[c];
    if (F.empty()) return 0.0;
    const double s = t / grid.dt();
    const int n = std::min(int(std::floor(s)), grid.nt - 2);
    const double th = s - n;
    return (1 - th) * F(n, i, j) + th * F(n + 1, i, j);
  }

  void enforce(std::array<Eigen::ArrayXd, 4>& U, double t) const {
    for (int i = 0; i < n1; ++i) U[1][Eigen::Index(id(i, 0))] = wall(t, i);
  }

  /// dU/dt = -A_1 d_1 U - A_2 d_2 U - (V.grad v0) + F.
  std::array<Eigen::ArrayXd, 4> rhs(const std::array<Eigen::ArrayXd, 4>& U, double t) const {
    std::array<Eigen::ArrayXd, 4> R;
    for (auto& r : R) r.resize(Eigen::Index(n1) * n2);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n1; ++i) {
      // Column with two ghost nodes on each side.
      std::vector<Eigen::Vector4d> col(n2 + 4);
      for (int j = 0; j < n2; ++j)
        for (int c = 0; c < 4; ++c) col[j + 2](c) = U[c][Eigen::Index(id(i, j))];
      col[1] = 4 * col[2] - 6 * col[3] + 4 * col[4] - col[5];
      col[0] = 4 * col[1] - 6 * col[2] + 4 * col[3] - col[4];
      col[n2 + 2] = 3 * col[n2 + 1] - 3 * col[n2] + col[n2 - 1];
      col[n2 + 3] = 3 * col[n2 + 2] - 3 * col[n2 + 1] + col[n2];
      auto at1 = [&](int ii, int j) {
        const int w = ((ii % n1) + n1) % n1;
        Eigen::Vector4d u;
        for (int c = 0; c < 4; ++c) u(c) = U[c][Eigen::Index(id(w, j))];
        return u;
      };
      for (int j = 0; j < n2; ++j) {
        const double x1 = grid.x1.at(i), x2 = grid.x2_reg.at(j);
        const Vec2 v = gs.v(t, x1, x2);
        const Mat2 J = gs.grad_v(t, x1, x2);
        const Eigen::Vector4d u = col[j + 2];
        const Eigen::Vector4d um1 = at1(i - 1, j), um2 = at1(i - 2, j), up1 = at1(i + 1, j), up2 = at1(i + 2, j);
        const Eigen::Vector4d dm1 = (3 * u - 4 * um1 + um2) / (2 * h1), dp1 = (-3 * u + 4 * up1 - up2) / (2 * h1);
        const Eigen::Vector4d dm2 = (3 * u - 4 * col[j + 1] + col[j]) / (2 * h2);
        const Eigen::Vector4d dp2 = (-3 * u + 4 * col[j + 3] - col[j + 4]) / (2 * h2);
        Eigen::Vector4d r = Eigen::Vector4d::Zero();
        for (int m = 0; m < 4; ++m) {
          const double l1 = v(0) + ac.lambda[0](m), l2 = v(1) + ac.lambda[1](m);
          r -= ac.proj[0][m] * (std::max(l1, 0.0) * dm1 + std::min(l1, 0.0) * dp1);
          r -= ac.proj[1][m] * (std::max(l2, 0.0) * dm2 + std::min(l2, 0.0) * dp2);
        }
        r.head<2>() -= J * u.head<2>();
        for (int c = 0; c < 4; ++c) R[c][Eigen::Index(id(i, j))] = r(c) + source(c, t, i, j);
      }
    }
    return R;
  }

  int substeps() const {
    double vmax = 0;
    for (int i = 0; i < n1; i += std::max(1, n1 / 16))
      for (int j = 0; j < n2; j += std::max(1, n2 / 16))
        for (int n = 0; n < grid.nt; n += std::max(1, grid.nt / 4))
          vmax = std::max(vmax, gs.v(grid.t(n), grid.x1.at(i), grid.x2_reg.at(j)).cwiseAbs().maxCoeff());
    const double c = std::max(ac.lambda[0].cwiseAbs().maxCoeff(), ac.lambda[1].cwiseAbs().maxCoeff());
    const double dt_max = prob.cfl / ((vmax + c) / h1 + (vmax + c) / h2);
    return std::max(1, int(std::ceil(grid.dt() / dt_max - 1e-12)));
  }

  void advance(std::array<Eigen::ArrayXd, 4>& U, double t0, int sub) const {
    const double tau = grid.dt() / sub;
    for (int s = 0; s < sub; ++s) {
      const double t = t0 + s * tau;
      auto k1 = rhs(U, t);
      std::array<Eigen::ArrayXd, 4> U1;
      for (int c = 0; c < 4; ++c) U1[c] = U[c] + tau * k1[c];
      enforce(U1, t + tau);
      auto k2 = rhs(U1, t + tau);
      for (int c = 0; c < 4; ++c) U[c] = 0.5 * U[c] + 0.5 * (U1[c] + tau * k2[c]);
      enforce(U, t + tau);
    }
  }
};

RegularOp make_op(const GroundState& gs, const Eos& eos, const RegularProblem& prob, const ProfileGrid& grid) {
  if (!gs.constant_ps) throw ProfileError("solve_regular_corrector: constant p0, s0 required");
  const double r0 = rho(eos, gs.p_ref, gs.s_ref), a0 = alpha(eos, gs.p_ref, gs.s_ref);
  return RegularOp{gs, prob, grid, acoustic_split(r0, a0), grid.x1.n, grid.x2_reg.n, grid.x1.step(),
                   grid.x2_reg.step()};
}

}  // namespace

RegularSolution solve_regular_corrector(const GroundState& gs, const Eos& eos, const RegularProblem& prob,
                                        const ProfileGrid& grid) {
  const RegularOp op = make_op(gs, eos, prob, grid);
  const int n1 = op.n1, n2 = op.n2;
  std::array<Eigen::ArrayXd, 4> U;
  const std::array<const FieldFn*, 4> init{&prob.init_Vt, &prob.init_Vd, &prob.init_P, &prob.init_W};
  for (int c = 0; c < 4; ++c) {
    U[c] = Eigen::ArrayXd::Zero(Eigen::Index(n1) * n2);
    if (*init[c])
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) U[c][Eigen::Index(op.id(i, j))] = (*init[c])(0.0, grid.x1.at(i), grid.x2_reg.at(j));
  }
  double corner = 0;
  for (int i = 0; i < n1; ++i) corner = std::max(corner, std::abs(U[1][Eigen::Index(op.id(i, 0))] - op.wall(0.0, i)));
  if (corner > 1e-10) {
    std::ostringstream os;
    os << "solve_regular_corrector: incompatible initial data, wall mismatch " << corner;
    throw ProfileError(os.str());
  }
  RegularSolution sol;
  for (auto& a : sol.U) a = RegularArray(grid.nt, n1, n2);
  const Eigen::Index slice = Eigen::Index(n1) * n2;
  auto store = [&](int n) {
    for (int c = 0; c < 4; ++c) sol.U[c].data.segment(n * slice, slice) = U[c];
  };
  store(0);
  const int sub = op.substeps();
  for (int n = 0; n + 1 < grid.nt; ++n) {
    op.advance(U, grid.t(n), sub);
    for (int c = 0; c < 4; ++c)
      if (!U[c].allFinite()) throw ProfileError("solve_regular_corrector: non-finite state (CFL violation?)");
    store(n + 1);
  }
  return sol;
}

RegularSolution solve_regular_corrector(const GroundState& gs, const Eos& eos, const FieldFn& init_Vt,
                                        const FieldFn& init_W1, const ProfileGrid& grid) {
  RegularProblem prob;
  prob.init_Vt = init_Vt;
  prob.init_W = init_W1;
  return solve_regular_corrector(gs, eos, prob, grid);
}

std::array<Eigen::ArrayXd, 4> advance_regular(const GroundState& gs, const Eos& eos, const RegularProblem& prob,
                                              const ProfileGrid& grid, const RegularSolution& sol, int n) {
  const RegularOp op = make_op(gs, eos, prob, grid);
  const Eigen::Index slice = Eigen::Index(op.n1) * op.n2;
  std::array<Eigen::ArrayXd, 4> U;
  for (int c = 0; c < 4; ++c) U[c] = sol.U[c].data.segment(n * slice, slice);
  op.advance(U, grid.t(n), op.substeps());
  return U;
}

Eigen::ArrayXd regular_energy(const RegularSolution& sol, const Eos& eos, const GroundState& gs,
                              const ProfileGrid& grid) {
  const double r0 = rho(eos, gs.p_ref, gs.s_ref), a0 = alpha(eos, gs.p_ref, gs.s_ref);
  const double wts[4] = {r0, r0, a0, 1.0};
  const int n1 = grid.x1.n, n2 = grid.x2_reg.n;
  Eigen::ArrayXd E(grid.nt);
  for (int n = 0; n < grid.nt; ++n) {
    double s = 0;
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) {
        const double w = (j == 0 || j == n2 - 1) ? 0.5 : 1.0;
        for (int c = 0; c < 3; ++c) s += w * wts[c] * sol.U[c](n, i, j) * sol.U[c](n, i, j);
      }
    E[n] = std::sqrt(s * grid.x1.step() * grid.x2_reg.step());
  }
  return E;
}

// ---------------------------------------------------------------------------

LayerArray solve_tangential_layer(const GroundState& gs, const Eos& eos, const LayerArray& W_tilde0,
                                  const RegularSolution& V0_regular, const ProfileGrid& grid, const InitFn& init) {
  const int n1 = grid.x1.n, n2 = grid.x2_layer.n, nX = grid.fast.size();
  const double rho0 = rho(eos, gs.p_ref, gs.s_ref);
  const RegularArray& P = V0_regular.U[kP];
  LayerArray src(grid.nt, n1, n2, nX);
  const double delta = 1e-3;
  for (int n = 0; n < grid.nt; ++n) {
    const double t = grid.t(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n1; ++i) {
      const double x1 = grid.x1.at(i);
      for (int j = 0; j < n2; ++j) {
        const double x2 = grid.x2_layer.at(j);
        double dP = 0;
        if (!P.empty()) {
          // d_1 P_bar at (x1_i, x2) from the regular grid.
          double w[4];
          const int j0 = x2_stencil(grid.x2_reg, x2, 4, w);
          for (int m = 0; m < 4; ++m)
            dP += w[m] * periodic_d1(P.data.data() + P.index(n, 0, j0 + m), P.n2, n1, grid.x1.step(), i);
        }
        // X_{v0} v0_1 / x2, evaluated away from the wall.
        const double xs = std::max(x2, delta);
        const double acc_flat = gs.acceleration(t, x1, xs)(0) / xs;
        for (int l = 0; l < nX; ++l) {
          const double S = W_tilde0.empty() ? 0.0 : W_tilde0(n, i, j, l);
          const double rS = rho(eos, gs.p0(t, x1, x2), gs.s0(t, x1, x2) + S);
          src(n, i, j, l) = -(1.0 / rS - 1.0 / rho0) * dP - (1.0 - rho0 / rS) * acc_flat * grid.fast.node(l);
        }
      }
    }
  }
  auto k = [&gs](double t, double x1, double x2) { return gs.grad_v(t, x1, x2)(0, 0); };
  LayerArray out = transport_layer(gs, grid, sample_layer(grid, init), &src, k);
  require_decay(out, "solve_tangential_layer");
  return out;
}

// ---------------------------------------------------------------------------

double nonpolarized_mass(const LayerField& U) {
  double m = 0;
  for (int c : {int(kVd), int(kP)})
    if (!U.layer[c].empty()) m = std::max(m, U.layer[c].data.abs().maxCoeff());
  return m;
}

ProfileSet polarize_leading(const ProfileSet& ps, double tol) {
  if (ps.order != 0) throw ProfileError("polarize_leading: order-0 set expected");
  const double v = nonpolarized_mass(ps.U);
  if (v > tol) {
    std::ostringstream os;
    os << "polarize_leading: (Id - P0) layer mass " << v << " above tolerance " << tol;
    throw PolarizationError(os.str(), v);
  }
  ProfileSet out = ps;
  for (int c : {int(kVd), int(kP)}) out.U.layer[c] = LayerArray();
  return out;
}

LayerField integrate_nonpolarized(int j, const LayerField& source, const ProfileGrid& grid, double tol) {
  if (j < 1) throw ProfileError("integrate_nonpolarized: j >= 1 required");
  for (int c : {int(kVt), int(kS)})
    if (!source.layer[c].empty() && source.layer[c].data.abs().maxCoeff() > tol)
      throw ProfileError("integrate_nonpolarized: source has a P0 component above tolerance");
  const FastGrid& fg = grid.fast;
  LayerField out;
  // L_d swaps the v_d and p slots: d_X U_p = -src_vd, d_X U_vd = -src_p.
  const std::array<std::pair<int, int>, 2> map{{{kVd, kP}, {kP, kVd}}};
  for (auto [from, to] : map) {
    const LayerArray& f = source.layer[from];
    if (f.empty()) continue;
    LayerArray a(f.nt, f.n1, f.n2, f.nX);
    const int lines = f.nt * f.n1 * f.n2;
#pragma omp parallel for schedule(static)
    for (int q = 0; q < lines; ++q) {
      const double* g = f.data.data() + std::size_t(q) * f.nX;
      double* o = a.data.data() + std::size_t(q) * f.nX;
      o[f.nX - 1] = 0.0;
      double dn = fg.derivative_at(g, 1, f.nX - 1);
      for (int l = f.nX - 2; l >= 0; --l) {
        const double h = fg.node(l + 1) - fg.node(l);
        const double dl = fg.derivative_at(g, 1, l);
        o[l] = o[l + 1] + 0.5 * h * (g[l] + g[l + 1]) + h * h / 12.0 * (dl - dn);
        dn = dl;
      }
    }
    out.layer[to] = std::move(a);
  }
  return out;
}

}  // namespace ebl
