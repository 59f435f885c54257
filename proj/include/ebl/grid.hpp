#ifndef EBL_GRID_HPP
#define EBL_GRID_HPP

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ebl {

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform 1-D axis. Periodic axes hold n points x_i = lo + i*len/n,
/// closed axes n points spanning [lo, lo+len].
struct Axis {
  double lo = 0.0;
  double len = 1.0;
  int n = 2;
  bool periodic = false;

  double step() const { return periodic ? len / n : len / (n - 1); }
  double at(int i) const { return lo + i * step(); }
  double hi() const { return lo + len; }
};

/// Tensor grid over (t, x1, x2).
struct SpaceTimeGrid {
  Axis t, x1, x2;
  std::size_t size() const { return std::size_t(t.n) * x1.n * x2.n; }
  std::size_t index(int n, int i, int j) const { return (std::size_t(n) * x1.n + i) * x2.n + j; }
  const Axis& axis(int a) const { return a == 0 ? t : (a == 1 ? x1 : x2); }
};

/// Primitive state (v1, v2, p, s) sampled on a SpaceTimeGrid.
struct StateField {
  SpaceTimeGrid grid;
  std::array<Eigen::ArrayXd, 4> comp;

  StateField() = default;
  explicit StateField(const SpaceTimeGrid& g) : grid(g) {
    for (auto& c : comp) c = Eigen::ArrayXd::Zero(Eigen::Index(g.size()));
  }
};

/// Second-order derivative of a grid function along axis a (0 = t, 1 = x1, 2 = x2):
/// centered in the interior, periodic wrap on periodic axes, 3-point one-sided at edges.
Eigen::ArrayXd diff(const Eigen::ArrayXd& f, const SpaceTimeGrid& g, int a);

/// Lagrange basis weights at x for the nodes xs.
void lagrange_weights(const double* xs, int k, double x, double* w);
/// Lagrange weights and derivative weights.
void lagrange_weights_d(const double* xs, int k, double x, double* w, double* dw);

/// Stretched nodes on [0, X_max]: X(q) = X_max (q + kappa q^2)/(1 + kappa), q uniform.
class FastGrid {
 public:
  FastGrid(double X_max = 24.0, int n = 161, double kappa = 3.0);

  int size() const { return int(nodes_.size()); }
  double X_max() const { return X_max_; }
  const Eigen::ArrayXd& nodes() const { return nodes_; }
  const Eigen::ArrayXd& weights() const { return weights_; }
  double node(int l) const { return nodes_[l]; }
  /// dX/dq at node l (q-spacing 1/(n-1)).
  double jacobian(int l) const { return jac_[l]; }
  double dq() const { return 1.0 / (size() - 1); }
  /// Map X to the fractional index coordinate (inverse of the stretching).
  double q_of(double X) const;

  /// Quadrature of samples over [0, X_max].
  double integrate(const Eigen::ArrayXd& f) const { return (weights_ * f).sum(); }
  /// d/dX of node samples, fourth order in q.
  Eigen::ArrayXd derivative(const Eigen::ArrayXd& f) const;
  /// Fourth-order derivative at node l of a strided sample sequence.
  double derivative_at(const double* f, std::ptrdiff_t stride, int l) const;
  /// Cubic Hermite interpolation of strided node samples f with nodal derivatives df;
  /// zero beyond X_max.
  double interpolate(const double* f, const double* df, std::ptrdiff_t stride, double X) const;
  /// Tail estimate for e^{-X}: the truncated integral beyond X_max.
  double exp_tail() const;

 private:
  double X_max_, kappa_;
  Eigen::ArrayXd nodes_, weights_, jac_;
};

}  // namespace ebl

#endif  // EBL_GRID_HPP
