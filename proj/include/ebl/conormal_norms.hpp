#ifndef EBL_CONORMAL_NORMS_HPP
#define EBL_CONORMAL_NORMS_HPP

#include "ebl/grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ebl {

/// Scalar grid function over (t, x1, x2); x2 is the normal variable.
struct GridFunction {
  SpaceTimeGrid grid;
  Eigen::ArrayXd data;
};

GridFunction sample(const SpaceTimeGrid& g, const std::function<double(double t, double x1, double x2)>& f);
/// Component c of a state field.
GridFunction component(const StateField& u, int c);

/// h(r) = r on [0, 1], 1 on [2, inf), joined by a C-infinity bump blend (1 - b) r + b.
double cutoff_h(double r);
/// Taylor coefficients h^(n)(r)/n! for n < len.
std::vector<double> cutoff_h_jet(double r, int len);

/// Z0 = d_t, Z1 = d_1, Z2 = h(x2) d_2. Powers of Z2 are expanded through the jet of h.
struct VectorFieldBasis {
  int d = 2;
  std::function<double(double)> h = cutoff_h;
  std::function<std::vector<double>(double, int)> h_jet = cutoff_h_jet;
};

using MultiIndex = std::array<int, 3>;

/// Z^alpha u = Z0^a0 Z1^a1 Z2^a2 u. Each power is one finite-difference stencil of at least
/// fourth order (no repeated differencing, which amplifies boundary errors).
GridFunction apply_Z(const VectorFieldBasis& basis, const MultiIndex& alpha, const GridFunction& u);
/// (eps d_2)^k u.
GridFunction apply_eps_dn(const GridFunction& u, double eps, int k = 1);

/// Calls visit(alpha, Z^alpha u) for every |alpha| <= max_order in lexicographic order,
/// skipping subtrees that vanish identically.
void for_each_Z(const VectorFieldBasis& basis, const GridFunction& u, int max_order,
                const std::function<void(const MultiIndex&, const GridFunction&)>& visit);

/// m, lambda and eps of the weighted norms. T is the time horizon of the grid (t in [0, T]);
/// T <= 0 takes it from the grid.
struct NormParams {
  int m = 0;
  double lambda = 1.0;
  double T = 0.0;
  double eps = 1.0;
};

/// ||e^{-(2/p) lambda t} u||_{L^p((0,T) x strip)}, trapezoid quadrature; p = 2 is the L2 norm.
double weighted_lp(const GridFunction& u, double lambda, double p = 2.0);
double sup_norm(const GridFunction& u);

/// |u|_{m,lambda,T} = sum_k lambda^{m-k} sum_{|alpha|=k} ||e^{-lambda t} Z^alpha u||_{L2}.
double weighted_norm(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis = {});
/// |u|^N = |u|_m + |eps d_2 u|_m.
double norm_N(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis = {});
/// |u|^E = sum_{2k+l<=m} lambda^{m-2k-l} |Z^l (eps d_2)^k u|_0.
double norm_E(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis = {});
/// A^m bound: sum_{l<=m} lambda^{m-l} |Z^l u|_0 + sum_{l<=m-2} lambda^{m-2-l} |eps d_2 Z^l u|_0.
double norm_A(const GridFunction& u, const NormParams& p, const VectorFieldBasis& basis = {});

/// ||u||* = ||u||_inf + sum_{z in Z^eps} (||z u||_inf + sum_i ||Z_i z u||_inf), and the
/// Lipschitz-type ||u||_{eps,Lip} = ||u||_inf + sum_z ||z u||_inf, with Z^eps = {Z0, Z1, Z2, eps d_2}.
struct StarNorms {
  double star = 0, lip = 0;
};
StarNorms norm_star(const GridFunction& u, double eps, const VectorFieldBasis& basis = {});

/// One CSV row per (norm, m, lambda, eps).
struct NormRow {
  std::string norm;
  int m = 0;
  double lambda = 1, eps = 1, value = 0, T = 0;
  int grid_id = 0;
};
struct NormReport {
  std::vector<NormRow> rows;
};
NormReport evaluate_norms(const GridFunction& u, const NormParams& p, int grid_id = 0,
                          const VectorFieldBasis& basis = {});
void write_norm_csv(const NormReport& rep, std::ostream& os);

/// Builds the family member for (eps, refinement level).
using FamilyFn = std::function<GridFunction(double eps, int level)>;
/// Builds a fixed test function at a refinement level.
using LevelFn = std::function<GridFunction(int level)>;

struct SobolevReport {
  std::vector<double> eps;
  std::array<std::vector<double>, 2> ratio;          // per refinement level
  std::array<std::vector<double>, 2> ratio_no_sqrt;  // control without sqrt(eps)
  double spread = 0, spread_no_sqrt = 0, refinement_change = 0;
  bool pass = false;          // spread <= 2 on both levels
  bool control_grows = false; // spread_no_sqrt >= 4
};
/// sqrt(eps) ||u||* / (T e^{lambda T} |u|^E) across the sweep, at two refinement levels.
SobolevReport check_sobolev_embedding(const FamilyFn& family, const std::vector<double>& eps_list,
                                      const NormParams& p, const VectorFieldBasis& basis = {});

struct ConstantReport {
  std::vector<double> lambda;
  std::array<std::vector<double>, 2> constant;  // per refinement level
  double spread = 0;                            // max / min over levels and lambdas
  bool pass = false;                            // spread <= 2
};

/// lambda^{k-l} |e^{-(2/p) lambda t} Z^l u|_{L^p} / (||u||_inf^{1-k/m} |u|_m^{k/m}), p = 2m/k.
double gagliardo_nirenberg_ratio(const GridFunction& u, int k, int l, const NormParams& p,
                                 const VectorFieldBasis& basis = {});
ConstantReport check_gagliardo_nirenberg(const LevelFn& u, int k, int l, int m, const std::vector<double>& lambdas,
                                         const VectorFieldBasis& basis = {});
/// |F(g)|_m / |g|_m across refinement and lambda.
ConstantReport check_moser(const std::function<double(double)>& F, const LevelFn& g, int m,
                           const std::vector<double>& lambdas, const VectorFieldBasis& basis = {});

/// Test families. Layer: e^{-x2/eps} sin x1 on [0, 2pi) x [0, 1], independent of t in [0, T],
/// 8 << level points per eps in x2. Slow: 0.5 cos(x1/4) e^{-x2/4} (1 + t/4) on [0, 8pi) x [0, 1] x [0, 1].
/// Oscillatory: 0.5 sin(8 x1) cos(8 x2) cos(8 t) on [0, 2pi) x [0, 1] x [0, 1].
GridFunction layer_family(double eps, int level, double T = 0.25);
GridFunction slow_family(int level);
GridFunction oscillatory_family(int level);

}  // namespace ebl

#endif  // EBL_CONORMAL_NORMS_HPP
