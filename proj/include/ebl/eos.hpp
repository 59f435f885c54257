#ifndef EBL_EOS_HPP
#define EBL_EOS_HPP

#include "ebl/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ebl {

struct AdmissibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Polytropic closure rho = p^(1/gamma) exp(-s/gamma), so p = rho^gamma e^s.
template <typename Scalar>
struct EosModel {
  Scalar gamma = Scalar(1.4);
  Scalar p_min = Scalar(1e-8);
};

using Eos = EosModel<double>;

/// u = (v_1..v_D, p, s).
template <typename Scalar, int D = 2>
using StateVector = Eigen::Matrix<Scalar, D + 2, 1>;

enum class OperatorKind { symmetrizer, flux, symmetric_flux, projector };

template <typename Scalar, int D = 2>
struct OperatorMatrix {
  Eigen::Matrix<Scalar, D + 2, D + 2> entries;
  OperatorKind kind;
};

template <typename Scalar>
void require_admissible(const EosModel<Scalar>& m, Scalar p) {
  if (!(p > m.p_min)) {
    std::ostringstream os;
    os << "inadmissible pressure p=" << p << " (p_min=" << m.p_min << ")";
    throw AdmissibilityError(os.str());
  }
}

template <typename Scalar>
Scalar rho(const EosModel<Scalar>& m, Scalar p, Scalar s) {
  require_admissible(m, p);
  using std::exp;
  using std::pow;
  return pow(p, Scalar(1) / m.gamma) * exp(-s / m.gamma);
}

/// d rho / d p, analytic.
template <typename Scalar>
Scalar rho_p(const EosModel<Scalar>& m, Scalar p, Scalar s) {
  return rho(m, p, s) / (m.gamma * p);
}

/// d rho / d s, analytic.
template <typename Scalar>
Scalar rho_s(const EosModel<Scalar>& m, Scalar p, Scalar s) {
  return -rho(m, p, s) / m.gamma;
}

/// alpha = rho_p / rho; independent of s for this closure.
template <typename Scalar>
Scalar alpha(const EosModel<Scalar>& m, Scalar p, Scalar /*s*/) {
  require_admissible(m, p);
  return Scalar(1) / (m.gamma * p);
}

template <typename Scalar, int D>
OperatorMatrix<Scalar, D> symmetrizer(const EosModel<Scalar>& m, const StateVector<Scalar, D>& u) {
  const Scalar p = u(D), s = u(D + 1);
  OperatorMatrix<Scalar, D> S{Eigen::Matrix<Scalar, D + 2, D + 2>::Zero(), OperatorKind::symmetrizer};
  const Scalar r = rho(m, p, s);
  for (int i = 0; i < D; ++i) S.entries(i, i) = r;
  S.entries(D, D) = alpha(m, p, s);
  S.entries(D + 1, D + 1) = Scalar(1);
  return S;
}

/// M(u, xi): velocity rows carry rho^-1 xi, pressure row alpha^-1 xi^T, entropy row zero.
template <typename Scalar, int D>
OperatorMatrix<Scalar, D> flux_matrix(const EosModel<Scalar>& m, const StateVector<Scalar, D>& u,
                                      const Eigen::Matrix<Scalar, D, 1>& xi) {
  if (xi.norm() == Scalar(0)) throw std::invalid_argument("flux_matrix: xi = 0");
  const Scalar p = u(D), s = u(D + 1);
  const Scalar r = rho(m, p, s), a = alpha(m, p, s);
  OperatorMatrix<Scalar, D> M{Eigen::Matrix<Scalar, D + 2, D + 2>::Zero(), OperatorKind::flux};
  M.entries.block(0, D, D, 1) = xi / r;
  M.entries.block(D, 0, 1, D) = xi.transpose() / a;
  return M;
}

/// L(xi) = S M = [[0, xi], [xi^T, 0]] plus a zero entropy block.
template <typename Scalar, int D>
OperatorMatrix<Scalar, D> symmetric_flux(const Eigen::Matrix<Scalar, D, 1>& xi) {
  OperatorMatrix<Scalar, D> L{Eigen::Matrix<Scalar, D + 2, D + 2>::Zero(), OperatorKind::symmetric_flux};
  L.entries.block(0, D, D, 1) = xi;
  L.entries.block(D, 0, 1, D) = xi.transpose();
  return L;
}

/// Orthogonal projector on ker L(e_D): diag(I_{D-1}, 0, 0, 1).
template <typename Scalar, int D>
OperatorMatrix<Scalar, D> projector_p0() {
  static_assert(D >= 1, "dimension must be positive");
  OperatorMatrix<Scalar, D> P{Eigen::Matrix<Scalar, D + 2, D + 2>::Zero(), OperatorKind::projector};
  for (int i = 0; i < D - 1; ++i) P.entries(i, i) = Scalar(1);
  P.entries(D + 1, D + 1) = Scalar(1);
  return P;
}

/// Starred blocks drop the entropy slot: the leading (D+1)x(D+1) block.
template <typename Scalar, int D>
Eigen::Matrix<Scalar, D + 1, D + 1> starred(const OperatorMatrix<Scalar, D>& A) {
  return A.entries.template topLeftCorner<D + 1, D + 1>();
}

/// Pointwise (X_v v + rho^-1 grad p, X_v p + alpha^-1 div v, X_v s) on a
/// (t, x1, x2) field, second-order differences. Needs 5 points per axis.
StateField euler_residual(const Eos& model, const StateField& u);

}  // namespace ebl

#endif  // EBL_EOS_HPP
