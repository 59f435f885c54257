#ifndef EBL_CASCADE_HPP
#define EBL_CASCADE_HPP

#include "ebl/layer_profiles.hpp"
#include "ebl/wkb_assembler.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace ebl {

/// Options for fitting the residual in eps.
struct ExtractionOptions {
  std::vector<double> eps_layer{4e-4, 8e-4, 1.2e-3, 1.6e-3, 2e-3, 2.4e-3, 2.8e-3};
  std::vector<double> eps_regular{4e-3, 8e-3, 1.2e-2, 1.6e-2, 2e-2, 2.4e-2, 2.8e-2};
  int degree = 5;
  bool layer = true, regular = true;
  double max_condition = 1e10;
  double fit_tol = 1e-6;  // relative least-squares misfit
};

/// Coefficient of eps^order in the po-form residual (E1..E4) of a partial expansion.
/// Layer part: r_full - r_regular at (t_n, x1_i, x2 = eps X_l), inner arrays (n2 = 1).
/// Regular part: regular-only residual at the regular nodes.
struct CascadeSource {
  int order = 0;
  std::array<LayerArray, 4> layer;
  std::array<RegularArray, 4> regular;
  double fit_residual = 0;  // max misfit relative to the sampled residual scale
  double condition = 0;
};

CascadeSource extract_cascade_source(int order, const WkbExpansion& partial, const ExtractionOptions& opt = {});

/// Pointwise po-form residual of the expansion at (t_n, x1_i, x2) with X = x2/eps on a node
/// l (l < 0: regular-only evaluation at x2). Exposed for testing.
Eigen::Vector4d expansion_residual(const WkbExpansion& exp, double eps, int n, int i, double x2, int l,
                                   bool with_layers);

/// Polynomial fit of samples y(eps_k); returns coefficients of degree 0..deg and the misfit.
Eigen::VectorXd fit_eps_polynomial(const std::vector<double>& eps, const Eigen::VectorXd& y, int deg,
                                   double* misfit = nullptr, double* condition = nullptr);

/// Prescribable order-1 initial data: P0 components only.
struct OrderOneInit {
  InitFn W_tilde1, Vt_tilde1;  // inner: (x1, 0, X); empty = zero
  InitFn Vd_tilde1;            // ignored: not prescribable; a conflict is reported
};

struct OrderOneReport {
  std::array<double, 4> stage_fit{};  // fit misfits of the four extraction stages
  double init_conflict = 0;           // max |requested (Id - P0) U^1(0) - computed|
};

/// Solves S^1: (Id - P0) U^1, (V_bar^1, W_bar^2), W_tilde^1, V_tilde_t^1 in that order.
ProfileSet solve_order_one(const WkbExpansion& exp0, const ExtractionOptions& opt = {}, const OrderOneInit& init = {},
                           OrderOneReport* report = nullptr);

/// Shear ground state with entropy layer e^{-X^2} sin x1 and tangential layer e^{-X^2} cos x1 at
/// order 0; order 1 adds the solved S^1 profiles.
WkbExpansion build_shear_expansion(int order, const ProfileGrid& grid = {}, OrderOneReport* report = nullptr,
                                   const Eos& eos = {});
/// Order-0 shear expansion that also carries the regular corrector V_bar^0 started from
/// V_t = cos x1 e^{-x2^2}; its normal velocity makes K1 of order eps rather than zero.
WkbExpansion build_shear_with_regular(const ProfileGrid& grid = {}, const Eos& eos = {});

}  // namespace ebl

#endif  // EBL_CASCADE_HPP
