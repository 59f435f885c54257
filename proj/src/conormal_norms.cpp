#include "ebl/conormal_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace ebl {

GridFunction sample(const SpaceTimeGrid& g, const std::function<double(double, double, double)>& f) {
  GridFunction u{g, Eigen::ArrayXd(Eigen::Index(g.size()))};
  for (int n = 0; n < g.t.n; ++n)
    for (int i = 0; i < g.x1.n; ++i)
      for (int j = 0; j < g.x2.n; ++j) u.data[Eigen::Index(g.index(n, i, j))] = f(g.t.at(n), g.x1.at(i), g.x2.at(j));
  return u;
}

GridFunction component(const StateField& u, int c) { return {u.grid, u.comp[c]}; }

namespace {

double bump(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }

// An axis with a single node carries a field that is constant along it.
bool frozen(const Axis& ax) { return ax.n == 1; }

// Stencil width for a j-th derivative: at least fourth order, odd so interior stencils are centered.
int stencil_width(int j) { return j % 2 ? j + 4 : j + 5; }

void require_resolution(const SpaceTimeGrid& g, int a, int order) {
  const Axis& ax = g.axis(a);
  if (order > 0 && !frozen(ax) && ax.n < stencil_width(order))
    throw GridError("conormal derivative of order " + std::to_string(order) + " along axis " + std::to_string(a) +
                    " needs at least " + std::to_string(stencil_width(order)) + " points");
}

// Fornberg weights for the m-th derivative at z from nodes x[0..n).
void fd_weights(double z, const double* x, int n, int m, double* w) {
  std::vector<double> c((m + 1) * n, 0.0);
  auto C = [&](int i, int k) -> double& { return c[k * n + i]; };
  double c1 = 1.0, c4 = x[0] - z;
  C(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1)
        for (int k = mn; k >= 1; --k) C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
      if (j == i - 1) C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  for (int i = 0; i < n; ++i) w[i] = C(i, m);
}

// j-th derivative along axis a with one stencil (no repeated differencing).
Eigen::ArrayXd axis_derivative(const Eigen::ArrayXd& f, const SpaceTimeGrid& g, int a, int j) {
  if (j == 0) return f;
  const Axis& ax = g.axis(a);
  if (frozen(ax)) return Eigen::ArrayXd::Zero(f.size());
  require_resolution(g, a, j);
  const int m = ax.n, w = stencil_width(j);
  const double h = ax.step();
  // Per-node stencil start and weights in units of h.
  std::vector<int> first(m);
  std::vector<double> wt(std::size_t(m) * w);
  std::vector<double> xs(w);
  for (int k = 0; k < m; ++k) {
    const int s = ax.periodic ? k - w / 2 : std::clamp(k - w / 2, 0, m - w);
    first[k] = s;
    for (int q = 0; q < w; ++q) xs[q] = s + q;
    fd_weights(double(k), xs.data(), w, j, wt.data() + std::size_t(k) * w);
    for (int q = 0; q < w; ++q) wt[std::size_t(k) * w + q] /= std::pow(h, j);
  }
  const int n1 = g.x1.n, n2 = g.x2.n;
  const std::ptrdiff_t stride = a == 0 ? std::ptrdiff_t(n1) * n2 : (a == 1 ? n2 : 1);
  const int outer = a == 0 ? 1 : (a == 1 ? g.t.n : g.t.n * n1);
  const int inner = a == 0 ? n1 * n2 : (a == 1 ? n2 : 1);
  Eigen::ArrayXd out(f.size());
#pragma omp parallel for schedule(static)
  for (int o = 0; o < outer; ++o)
    for (int in = 0; in < inner; ++in) {
      const std::ptrdiff_t base = std::ptrdiff_t(o) * m * stride + in;
      for (int k = 0; k < m; ++k) {
        double d = 0;
        const double* wk = wt.data() + std::size_t(k) * w;
        for (int q = 0; q < w; ++q) {
          const int idx = ax.periodic ? ((first[k] + q) % m + m) % m : first[k] + q;
          d += wk[q] * f[base + idx * stride];
        }
        out[base + k * stride] = d;
      }
    }
  return out;
}

// Truncated Taylor series arithmetic for the jets of h.
using Series = std::vector<double>;

Series series_exp(const Series& f) {
  Series e(f.size(), 0.0);
  e[0] = std::exp(f[0]);
  for (std::size_t n = 1; n < f.size(); ++n) {
    double s = 0;
    for (std::size_t k = 1; k <= n; ++k) s += double(k) * f[k] * e[n - k];
    e[n] = s / double(n);
  }
  return e;
}

Series series_mul(const Series& a, const Series& b) {
  Series c(a.size(), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n)
    for (std::size_t k = 0; k <= n; ++k) c[n] += a[k] * b[n - k];
  return c;
}

Series series_div(const Series& a, const Series& d) {
  Series q(a.size(), 0.0);
  for (std::size_t n = 0; n < a.size(); ++n) {
    double s = a[n];
    for (std::size_t k = 1; k <= n; ++k) s -= d[k] * q[n - k];
    q[n] = s / d[0];
  }
  return q;
}

}  // namespace

std::vector<double> cutoff_h_jet(double r, int len) {
  Series j(len, 0.0);
  if (r <= 1.0 || r >= 2.0) {
    j[0] = cutoff_h(r);
    if (r <= 1.0 && len > 1) j[1] = 1.0;
    return j;
  }
  // -1/(r-1+d) and -1/(2-r-d) as series in d.
  Series fa(len), fb(len);
  for (int n = 0; n < len; ++n) {
    fa[n] = -((n % 2) ? -1.0 : 1.0) / std::pow(r - 1.0, n + 1);
    fb[n] = -1.0 / std::pow(2.0 - r, n + 1);
  }
  const Series a = series_exp(fa), b = series_exp(fb);
  Series ab(len);
  for (int n = 0; n < len; ++n) ab[n] = a[n] + b[n];
  const Series s = series_div(a, ab);
  Series x(len, 0.0), one_minus_s(len);
  x[0] = r;
  if (len > 1) x[1] = 1.0;
  for (int n = 0; n < len; ++n) one_minus_s[n] = (n == 0 ? 1.0 : 0.0) - s[n];
  Series out = series_mul(one_minus_s, x);
  for (int n = 0; n < len; ++n) out[n] += s[n];
  return out;
}

namespace {

Series series_d(const Series& a) {
  Series d(a.size(), 0.0);
  for (std::size_t n = 0; n + 1 < a.size(); ++n) d[n] = double(n + 1) * a[n + 1];
  return d;
}

// Normal operator word, applied right to left: 'Z' = h(x2) d_2, 'E' = eps d_2.
// Expands the word as sum_j c_j(x2) d_2^j with c_j tracked as Taylor series at each node.
Eigen::ArrayXd apply_normal(const Eigen::ArrayXd& f, const SpaceTimeGrid& g, const std::string& word, double eps,
                            const VectorFieldBasis& basis) {
  const int K = int(word.size());
  if (K == 0) return f;
  if (frozen(g.x2)) return Eigen::ArrayXd::Zero(f.size());
  const int n2 = g.x2.n, len = K + 1;
  Eigen::MatrixXd coef(n2, K + 1);  // c_j at node
  for (int q = 0; q < n2; ++q) {
    const double x = g.x2.at(q);
    const Series hj = basis.h_jet(x, len);
    std::vector<Series> P(K + 1, Series(len, 0.0));
    P[0][0] = 1.0;
    for (int k = K - 1; k >= 0; --k) {
      std::vector<Series> Q(K + 1, Series(len, 0.0));
      for (int jj = 0; jj <= K; ++jj) {
        Series t = series_d(P[jj]);
        if (jj > 0)
          for (int n = 0; n < len; ++n) t[n] += P[jj - 1][n];
        if (word[k] == 'Z') {
          Q[jj] = series_mul(hj, t);
        } else {
          for (int n = 0; n < len; ++n) Q[jj][n] = eps * t[n];
        }
      }
      P.swap(Q);
    }
    for (int jj = 0; jj <= K; ++jj) coef(q, jj) = P[jj][0];
  }
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(f.size());
  const Eigen::Index lines = f.size() / n2;
  for (int jj = 0; jj <= K; ++jj) {
    if ((coef.col(jj).array() == 0.0).all()) continue;
    const Eigen::ArrayXd d = axis_derivative(f, g, 2, jj);
    for (Eigen::Index l = 0; l < lines; ++l) out.segment(l * n2, n2) += coef.col(jj).array() * d.segment(l * n2, n2);
  }
  return out;
}

GridFunction chain(const VectorFieldBasis& basis, const GridFunction& u, int at, int a1, const std::string& word,
                   double eps) {
  GridFunction out{u.grid, axis_derivative(u.data, u.grid, 0, at)};
  out.data = axis_derivative(out.data, u.grid, 1, a1);
  out.data = apply_normal(out.data, u.grid, word, eps, basis);
  return out;
}

// Enumerates Z^alpha with the normal word outer + Z^a2 + inner (inner applied first).
void for_each_word(const VectorFieldBasis& basis, const GridFunction& u, int max_order, const std::string& outer,
                   const std::string& inner, double eps,
                   const std::function<void(const MultiIndex&, const GridFunction&)>& visit) {
  for (int a = 0; a < 3; ++a) require_resolution(u.grid, a, max_order + (a == 2 ? int(outer.size() + inner.size()) : 0));
  auto vanishes = [](const Eigen::ArrayXd& f) { return (f == 0.0).all(); };
  for (int a0 = 0; a0 <= max_order; ++a0) {
    const Eigen::ArrayXd d0 = axis_derivative(u.data, u.grid, 0, a0);
    if (vanishes(d0)) break;
    for (int a1 = 0; a0 + a1 <= max_order; ++a1) {
      const Eigen::ArrayXd d1 = axis_derivative(d0, u.grid, 1, a1);
      if (vanishes(d1)) break;
      for (int a2 = 0; a0 + a1 + a2 <= max_order; ++a2) {
        GridFunction d2{u.grid, apply_normal(d1, u.grid, outer + std::string(a2, 'Z') + inner, eps, basis)};
        if (vanishes(d2.data)) continue;
        visit({a0, a1, a2}, d2);
      }
    }
  }
}

// Trapezoid weights on one axis; a frozen time axis integrates exp(-2 lambda t) over [0, len] exactly.
Eigen::ArrayXd axis_weights(const Axis& ax) {
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(ax.n, ax.n > 1 ? ax.step() : 1.0);
  if (!ax.periodic && ax.n > 1) w[0] = w[ax.n - 1] = 0.5 * ax.step();
  return w;
}

double check_T(const GridFunction& u, const NormParams& p) {
  const double T = u.grid.t.hi();
  if (p.T > 0 && std::abs(p.T - T) > 1e-12 * std::max(1.0, T))
    throw GridError("norm: time axis does not span [0, T]");
  return T;
}

}  // namespace

double cutoff_h(double r) {
  if (r <= 1.0) return r;
  if (r >= 2.0) return 1.0;
  const double a = bump(r - 1.0), b = bump(2.0 - r);
  const double s = a / (a + b);
  return (1.0 - s) * r + s;
}

GridFunction apply_Z(const VectorFieldBasis& basis, const MultiIndex& alpha, const GridFunction& u) {
  for (int a = 0; a < 3; ++a) require_resolution(u.grid, a, alpha[a]);
  return chain(basis, u, alpha[0], alpha[1], std::string(alpha[2], 'Z'), 1.0);
}

GridFunction apply_eps_dn(const GridFunction& u, double eps, int k) {
  require_resolution(u.grid, 2, k);
  return chain(VectorFieldBasis{}, u, 0, 0, std::string(k, 'E'), eps);
}

void for_each_Z(const VectorFieldBasis& basis, const GridFunction& u, int max_order,
                const std::function<void(const MultiIndex&, const GridFunction&)>& visit) {
  for_each_word(basis, u, max_order, "", "", 1.0, visit);
}

double weighted_lp(const GridFunction& u, double lambda, double p) {
  const SpaceTimeGrid& g = u.grid;
  if (std::isinf(p)) return sup_norm(u);
  const Eigen::ArrayXd w1 = axis_weights(g.x1), w2 = axis_weights(g.x2);
  Eigen::ArrayXd wt = axis_weights(g.t);
  for (int n = 0; n < g.t.n; ++n) wt[n] *= std::exp(-2.0 * lambda * g.t.at(n));
  if (frozen(g.t)) {
    const double T = g.t.len;
    wt[0] = lambda > 0 ? (std::exp(-2 * lambda * g.t.lo) - std::exp(-2 * lambda * (g.t.lo + T))) / (2 * lambda) : T;
  }
  double s = 0;
  for (int n = 0; n < g.t.n; ++n)
    for (int i = 0; i < g.x1.n; ++i) {
      const auto line = u.data.segment(Eigen::Index(g.index(n, i, 0)), g.x2.n).abs();
      const double q = p == 2.0 ? (w2 * line.square()).sum() : (w2 * line.pow(p)).sum();
      s += wt[n] * w1[i] * q;
    }
  return std::pow(s, 1.0 / p);
}

double sup_norm(const GridFunction& u) { return u.data.size() ? u.data.abs().maxCoeff() : 0.0; }

double weighted_norm(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis) {
  check_T(u, p);
  double s = 0;
  for_each_Z(basis, u, p.m, [&](const MultiIndex& a, const GridFunction& z) {
    s += std::pow(p.lambda, p.m - (a[0] + a[1] + a[2])) * weighted_lp(z, p.lambda);
  });
  return s;
}

double norm_N(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis) {
  return weighted_norm(u, p, basis) + weighted_norm(apply_eps_dn(u, p.eps), p, basis);
}

double norm_E(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis) {
  check_T(u, p);
  double s = 0;
  for (int k = 0; 2 * k <= p.m; ++k) {
    const int top = p.m - 2 * k;
    for_each_word(basis, u, top, "", std::string(k, 'E'), p.eps, [&](const MultiIndex& a, const GridFunction& z) {
      s += std::pow(p.lambda, top - (a[0] + a[1] + a[2])) * weighted_lp(z, p.lambda);
    });
  }
  return s;
}

double norm_A(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis) {
  double s = weighted_norm(u, p, basis);
  if (p.m >= 2) {
    const int top = p.m - 2;
    for_each_word(basis, u, top, "E", "", p.eps, [&](const MultiIndex& a, const GridFunction& z) {
      s += std::pow(p.lambda, top - (a[0] + a[1] + a[2])) * weighted_lp(z, p.lambda);
    });
  }
  return s;
}

StarNorms norm_star(const GridFunction& u, double eps, const VectorFieldBasis& basis) {
  StarNorms r;
  const double u0 = sup_norm(u);
  r.star = r.lip = u0;
  // z in {Z0, Z1, Z2, eps d_2} followed by Z_i, each composite evaluated in one pass.
  const std::array<std::string, 4> word{"", "", "Z", "E"};
  for (int z = 0; z < 4; ++z) {
    const double first = sup_norm(chain(basis, u, z == 0, z == 1, word[z], eps));
    r.lip += first;
    r.star += first;
    for (int i = 0; i < 3; ++i)
      r.star += sup_norm(chain(basis, u, (z == 0) + (i == 0), (z == 1) + (i == 1), (i == 2 ? "Z" : "") + word[z], eps));
  }
  return r;
}

NormReport evaluate_norms(const GridFunction& u, const NormParams& p, int grid_id, const VectorFieldBasis& basis) {
  NormReport rep;
  const double T = check_T(u, p);
  auto add = [&](const std::string& name, double v) { rep.rows.push_back({name, p.m, p.lambda, p.eps, v, T, grid_id}); };
  add("weighted", weighted_norm(u, p, basis));
  add("N", norm_N(u, p, basis));
  add("E", norm_E(u, p, basis));
  add("A", norm_A(u, p, basis));
  const StarNorms s = norm_star(u, p.eps, basis);
  add("star", s.star);
  add("lip", s.lip);
  return rep;
}

void write_norm_csv(const NormReport& rep, std::ostream& os) {
  os << "norm,m,lambda,eps,value,grid_id,T\n";
  os.precision(12);
  for (const auto& r : rep.rows)
    os << r.norm << ',' << r.m << ',' << r.lambda << ',' << r.eps << ',' << r.value << ',' << r.grid_id << ',' << r.T
       << '\n';
}

namespace {
double spread_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}
}  // namespace

SobolevReport check_sobolev_embedding(const FamilyFn& family, const std::vector<double>& eps_list,
                                      const NormParams& p, const VectorFieldBasis& basis) {
  SobolevReport rep;
  rep.eps = eps_list;
  for (int level = 0; level < 2; ++level) {
    for (double eps : eps_list) {
      const GridFunction u = family(eps, level);
      NormParams q = p;
      q.eps = eps;
      const double T = check_T(u, q);
      const double E = norm_E(u, q, basis);
      const double star = norm_star(u, eps, basis).star;
      const double denom = T * std::exp(p.lambda * T) * E;
      rep.ratio[level].push_back(std::sqrt(eps) * star / denom);
      rep.ratio_no_sqrt[level].push_back(star / denom);
    }
    rep.spread = std::max(rep.spread, spread_of(rep.ratio[level]));
    rep.spread_no_sqrt = std::max(rep.spread_no_sqrt, spread_of(rep.ratio_no_sqrt[level]));
  }
  for (std::size_t k = 0; k < eps_list.size(); ++k)
    rep.refinement_change =
        std::max(rep.refinement_change, std::abs(rep.ratio[1][k] - rep.ratio[0][k]) / rep.ratio[1][k]);
  rep.pass = rep.spread <= 2.0 && rep.refinement_change < 0.1;
  rep.control_grows = rep.spread_no_sqrt >= 4.0;
  return rep;
}

double gagliardo_nirenberg_ratio(const GridFunction& u, int k, int l, const NormParams& p,
                                 const VectorFieldBasis& basis) {
  if (!(0 <= l && l <= k && k <= p.m && p.m > 0)) throw std::invalid_argument("GN: need 0 <= l <= k <= m, m > 0");
  const double pexp = k == 0 ? std::numeric_limits<double>::infinity() : 2.0 * p.m / k;
  double lhs = 0;
  for_each_Z(basis, u, l, [&](const MultiIndex& a, const GridFunction& z) {
    if (a[0] + a[1] + a[2] == l) lhs += weighted_lp(z, p.lambda, pexp);
  });
  lhs *= std::pow(p.lambda, k - l);
  const double theta = double(k) / p.m;
  const double rhs = std::pow(sup_norm(u), 1 - theta) * std::pow(weighted_norm(u, p, basis), theta);
  return rhs > 0 ? lhs / rhs : 0.0;
}

ConstantReport check_gagliardo_nirenberg(const LevelFn& u, int k, int l, int m, const std::vector<double>& lambdas,
                                         const VectorFieldBasis& basis) {
  ConstantReport rep;
  rep.lambda = lambdas;
  std::vector<double> all;
  for (int level = 0; level < 2; ++level) {
    const GridFunction f = u(level);
    for (double lam : lambdas) {
      const double c = gagliardo_nirenberg_ratio(f, k, l, NormParams{m, lam, 0.0, 1.0}, basis);
      rep.constant[level].push_back(c);
      all.push_back(c);
    }
  }
  rep.spread = spread_of(all);
  rep.pass = rep.spread <= 2.0;
  return rep;
}

ConstantReport check_moser(const std::function<double(double)>& F, const LevelFn& g, int m,
                           const std::vector<double>& lambdas, const VectorFieldBasis& basis) {
  ConstantReport rep;
  rep.lambda = lambdas;
  std::vector<double> all;
  for (int level = 0; level < 2; ++level) {
    const GridFunction gf = g(level);
    GridFunction Fg = gf;
    Fg.data = gf.data.unaryExpr(F);
    for (double lam : lambdas) {
      const NormParams p{m, lam, 0.0, 1.0};
      const double den = weighted_norm(gf, p, basis);
      const double c = den > 0 ? weighted_norm(Fg, p, basis) / den : 0.0;
      rep.constant[level].push_back(c);
      all.push_back(c);
    }
  }
  rep.spread = spread_of(all);
  rep.pass = rep.spread <= 2.0;
  return rep;
}

GridFunction layer_family(double eps, int level, double T) {
  const int n2 = int(std::ceil((8 << level) / eps)) + 1;
  const SpaceTimeGrid g{Axis{0, T, 1, false}, Axis{0, 2 * M_PI, 24 << level, true}, Axis{0, 1, n2, false}};
  return sample(g, [eps](double, double x1, double x2) { return std::exp(-x2 / eps) * std::sin(x1); });
}

GridFunction slow_family(int level) {
  const int n = 32 << level;
  const SpaceTimeGrid g{Axis{0, 1, n / 2 + 1, false}, Axis{0, 8 * M_PI, n, true}, Axis{0, 1, n / 2 + 1, false}};
  return sample(g, [](double t, double x1, double x2) {
    return 0.5 * std::cos(0.25 * x1) * std::exp(-0.25 * x2) * (1 + 0.25 * t);
  });
}

GridFunction oscillatory_family(int level) {
  const int n = 64 << level;
  const SpaceTimeGrid g{Axis{0, 1, n / 4 + 1, false}, Axis{0, 2 * M_PI, n, true}, Axis{0, 1, n / 4 + 1, false}};
  return sample(g, [](double t, double x1, double x2) { return 0.5 * std::sin(8 * x1) * std::cos(8 * x2) * std::cos(8 * t); });
}

}  // namespace ebl
