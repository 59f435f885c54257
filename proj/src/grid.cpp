#include "ebl/grid.hpp"

#include <cmath>

namespace ebl {

Eigen::ArrayXd diff(const Eigen::ArrayXd& f, const SpaceTimeGrid& g, int a) {
  const Axis& ax = g.axis(a);
  if (ax.n < 3) throw GridError("diff: axis needs at least 3 points");
  const int nt = g.t.n, n1 = g.x1.n, n2 = g.x2.n;
  const std::ptrdiff_t stride = a == 0 ? std::ptrdiff_t(n1) * n2 : (a == 1 ? n2 : 1);
  const int m = ax.n;
  const double h = ax.step();
  Eigen::ArrayXd out(f.size());
  // Iterate over all lines along axis a.
  const int outer = a == 0 ? 1 : (a == 1 ? nt : nt * n1);
  const int inner = a == 0 ? n1 * n2 : (a == 1 ? n2 : 1);
  const std::ptrdiff_t outer_stride = std::ptrdiff_t(m) * stride;
#pragma omp parallel for schedule(static)
  for (int o = 0; o < outer; ++o) {
    for (int in = 0; in < inner; ++in) {
      const std::ptrdiff_t base = o * outer_stride + in;
      auto F = [&](int k) { return f[base + k * stride]; };
      for (int k = 0; k < m; ++k) {
        double d;
        if (ax.periodic) {
          d = (F((k + 1) % m) - F((k - 1 + m) % m)) / (2 * h);
        } else if (k == 0) {
          d = (-3 * F(0) + 4 * F(1) - F(2)) / (2 * h);
        } else if (k == m - 1) {
          d = (3 * F(m - 1) - 4 * F(m - 2) + F(m - 3)) / (2 * h);
        } else {
          d = (F(k + 1) - F(k - 1)) / (2 * h);
        }
        out[base + k * stride] = d;
      }
    }
  }
  return out;
}

void lagrange_weights(const double* xs, int k, double x, double* w) {
  for (int i = 0; i < k; ++i) {
    double p = 1.0;
    for (int j = 0; j < k; ++j)
      if (j != i) p *= (x - xs[j]) / (xs[i] - xs[j]);
    w[i] = p;
  }
}

void lagrange_weights_d(const double* xs, int k, double x, double* w, double* dw) {
  lagrange_weights(xs, k, x, w);
  for (int i = 0; i < k; ++i) {
    double denom = 1.0;
    for (int j = 0; j < k; ++j)
      if (j != i) denom *= xs[i] - xs[j];
    double s = 0.0;
    for (int m = 0; m < k; ++m) {
      if (m == i) continue;
      double p = 1.0;
      for (int j = 0; j < k; ++j)
        if (j != i && j != m) p *= x - xs[j];
      s += p;
    }
    dw[i] = s / denom;
  }
}

FastGrid::FastGrid(double X_max, int n, double kappa) : X_max_(X_max), kappa_(kappa) {
  if (n < 9 || X_max <= 0 || kappa < 0) throw GridError("FastGrid: bad parameters");
  nodes_.resize(n);
  jac_.resize(n);
  weights_.resize(n);
  const double dq = 1.0 / (n - 1);
  for (int l = 0; l < n; ++l) {
    const double q = l * dq;
    nodes_[l] = X_max * (q + kappa * q * q) / (1 + kappa);
    jac_[l] = X_max * (1 + 2 * kappa * q) / (1 + kappa);
  }
  nodes_[0] = 0.0;
  nodes_[n - 1] = X_max;
  // Simpson in q when the interval count is even, trapezoid otherwise.
  for (int l = 0; l < n; ++l) {
    double c;
    if ((n - 1) % 2 == 0)
      c = (l == 0 || l == n - 1) ? 1.0 / 3 : (l % 2 ? 4.0 / 3 : 2.0 / 3);
    else
      c = (l == 0 || l == n - 1) ? 0.5 : 1.0;
    weights_[l] = c * dq * jac_[l];
  }
}

double FastGrid::q_of(double X) const {
  const double c = X * (1 + kappa_) / X_max_;
  if (kappa_ == 0) return c;
  return (-1 + std::sqrt(1 + 4 * kappa_ * c)) / (2 * kappa_);
}

double FastGrid::derivative_at(const double* f, std::ptrdiff_t s, int l) const {
  const int n = size();
  const double h = dq();
  double d;
  if (l >= 2 && l <= n - 3) {
    d = (f[(l - 2) * s] - 8 * f[(l - 1) * s] + 8 * f[(l + 1) * s] - f[(l + 2) * s]) / (12 * h);
  } else if (l < 2) {
    // One-sided five-point stencils.
    const double* g = f + l * s;
    if (l == 0)
      d = (-25 * g[0] + 48 * g[s] - 36 * g[2 * s] + 16 * g[3 * s] - 3 * g[4 * s]) / (12 * h);
    else
      d = (-3 * g[-s] - 10 * g[0] + 18 * g[s] - 6 * g[2 * s] + g[3 * s]) / (12 * h);
  } else {
    const double* g = f + l * s;
    if (l == n - 1)
      d = (25 * g[0] - 48 * g[-s] + 36 * g[-2 * s] - 16 * g[-3 * s] + 3 * g[-4 * s]) / (12 * h);
    else
      d = (3 * g[s] + 10 * g[0] - 18 * g[-s] + 6 * g[-2 * s] - g[-3 * s]) / (12 * h);
  }
  return d / jac_[l];
}

Eigen::ArrayXd FastGrid::derivative(const Eigen::ArrayXd& f) const {
  Eigen::ArrayXd out(f.size());
  for (int l = 0; l < size(); ++l) out[l] = derivative_at(f.data(), 1, l);
  return out;
}

double FastGrid::interpolate(const double* f, const double* df, std::ptrdiff_t s, double X) const {
  if (X >= X_max_) return X == X_max_ ? f[(size() - 1) * s] : 0.0;
  if (X < 0) throw GridError("FastGrid::interpolate: negative X");
  const double q = q_of(X);
  int l = int(q / dq());
  if (l > size() - 2) l = size() - 2;
  const double x0 = nodes_[l], x1 = nodes_[l + 1], h = x1 - x0;
  const double u = (X - x0) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * f[l * s] + h10 * h * df[l * s] + h01 * f[(l + 1) * s] + h11 * h * df[(l + 1) * s];
}

double FastGrid::exp_tail() const { return std::exp(-X_max_); }

}  // namespace ebl
