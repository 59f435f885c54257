#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ebl/eos.hpp"

#include <random>

using namespace ebl;

TEST_CASE("rho and alpha closed values") {
  Eos m;
  CHECK(rho(m, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(alpha(m, 1.0, 0.0) == doctest::Approx(1.0 / 1.4).epsilon(1e-15));
  EosModel<double> m2{2.0, 1e-8};
  CHECK(rho(m2, 4.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("analytic rho_p matches a centered difference") {
  Eos m;
  for (double p : {0.3, 1.0, 2.7})
    for (double s : {-0.5, 0.0, 0.8}) {
      const double h = 1e-5;
      const double fd = (rho(m, p + h, s) - rho(m, p - h, s)) / (2 * h);
      CHECK(std::abs(fd - rho_p(m, p, s)) / rho_p(m, p, s) < 1e-6);
      const double fds = (rho(m, p, s + h) - rho(m, p, s - h)) / (2 * h);
      CHECK(std::abs(fds - rho_s(m, p, s)) < 1e-8);
      // alpha is rho_p / rho by definition.
      CHECK(std::abs(fd / rho(m, p, s) - alpha(m, p, s)) < 1e-8);
    }
}

TEST_CASE("inadmissible pressure is a hard error") {
  Eos m;
  CHECK_THROWS_AS(rho(m, 1e-9, 0.0), AdmissibilityError);
  CHECK_THROWS_AS(alpha(m, -1.0, 0.0), AdmissibilityError);
}

TEST_CASE("operator matrices") {
  Eos m;
  StateVector<double> u(0.2, -0.1, 1.0, 0.0);
  const auto S = symmetrizer<double, 2>(m, u);
  CHECK(S.kind == OperatorKind::symmetrizer);
  CHECK((S.entries.diagonal() - Eigen::Vector4d(1, 1, 1 / 1.4, 1)).norm() < 1e-14);

  const Eigen::Vector2d e2(0, 1);
  const auto M = flux_matrix<double, 2>(m, u, e2);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(M.entries);
  int rank = 0;
  for (int k = 0; k < 4; ++k) rank += svd.singularValues()(k) > 1e-12;
  CHECK(4 - rank == 2);
  const auto M2 = flux_matrix<double, 2>(m, u, Eigen::Vector2d(2 * e2));
  CHECK((M2.entries - 2 * M.entries).norm() < 1e-14);
  const auto zero_xi = [&] { return flux_matrix<double, 2>(m, u, Eigen::Vector2d::Zero()); };
  CHECK_THROWS_AS(zero_xi(), std::invalid_argument);

  const auto P = projector_p0<double, 2>();
  CHECK((P.entries.diagonal() - Eigen::Vector4d(1, 0, 0, 1)).norm() == 0.0);
  CHECK((P.entries * P.entries - P.entries).norm() == 0.0);
  const auto L = symmetric_flux<double, 2>(e2);
  CHECK((P.entries * L.entries).norm() == 0.0);
  Eigen::JacobiSVD<Eigen::Matrix4d> sv2(Eigen::Matrix4d::Identity() - P.entries);
  int r2 = 0;
  for (int k = 0; k < 4; ++k) r2 += sv2.singularValues()(k) > 1e-12;
  CHECK(r2 == 2);
  CHECK(starred(S).rows() == 3);
}

TEST_CASE("random admissible states: SPD symmetrizer, SM = L, kernel dimension d") {
  Eos m;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2, 2), P(0.05, 5);
  double worst = 0;
  int kernel_ok = 0;
  for (int k = 0; k < 10000; ++k) {
    StateVector<double> u(U(rng), U(rng), P(rng), U(rng));
    Eigen::Vector2d xi(U(rng), U(rng));
    if (xi.norm() < 1e-3) xi(0) = 1;
    const auto S = symmetrizer<double, 2>(m, u);
    CHECK_MESSAGE(S.entries.diagonal().minCoeff() > 0, "symmetrizer not SPD");
    const auto M = flux_matrix<double, 2>(m, u, xi);
    const auto L = symmetric_flux<double, 2>(xi);
    worst = std::max(worst, (S.entries * M.entries - L.entries).norm());
    CHECK((L.entries - L.entries.transpose()).norm() == 0.0);
    if (k < 100) {
      Eigen::JacobiSVD<Eigen::Matrix4d> svd(M.entries);
      int rank = 0;
      for (int q = 0; q < 4; ++q) rank += svd.singularValues()(q) > 1e-10 * svd.singularValues()(0);
      kernel_ok += (4 - rank == 2);
    }
  }
  CHECK(worst < 1e-12);
  CHECK(kernel_ok == 100);
}

namespace {
StateField shear_field(int n) {
  SpaceTimeGrid g{Axis{0, 0.25, n, false}, Axis{0, 2 * M_PI, n, true}, Axis{0, 1, n, false}};
  StateField f(g);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t k = g.index(a, i, j);
        const double t = g.t.at(a), x1 = g.x1.at(i), x2 = g.x2.at(j);
        // Shear plus a passive entropy wave: an exact solution with nonzero truncation error.
        f.comp[0][k] = x2;
        f.comp[1][k] = 0;
        f.comp[2][k] = 1;
        f.comp[3][k] = std::sin(x1 - t * x2) * std::cos(3 * x2);
      }
  return f;
}
}  // namespace

TEST_CASE("euler residual: constant state, exact solution order, perturbation") {
  Eos m;
  SpaceTimeGrid g{Axis{0, 1, 6, false}, Axis{0, 1, 6, true}, Axis{0, 1, 6, false}};
  StateField c(g);
  c.comp[2].setConstant(1.3);
  const StateField rc = euler_residual(m, c);
  for (const auto& r : rc.comp) CHECK(r.abs().maxCoeff() <= 1e-14);

  std::vector<double> err;
  for (int n : {16, 32, 64, 128}) {
    const StateField r = euler_residual(m, shear_field(n));
    double e = 0;
    for (const auto& q : r.comp) e = std::max(e, q.abs().maxCoeff());
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double order = std::log2(err[k - 1] / err[k]);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
  }

  StateField p = shear_field(16);
  for (Eigen::Index k = 0; k < p.comp[0].size(); ++k) p.comp[0][k] += 0.5 * std::sin(2.0 * k / 256.0);
  const StateField rp = euler_residual(m, p);
  CHECK(rp.comp[0].abs().maxCoeff() + rp.comp[2].abs().maxCoeff() > 0.1);

  SpaceTimeGrid tiny{Axis{0, 1, 4, false}, Axis{0, 1, 8, true}, Axis{0, 1, 8, false}};
  CHECK_THROWS_AS(euler_residual(m, StateField(tiny)), GridError);
}
