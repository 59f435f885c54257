#include "ebl/eos.hpp"

namespace ebl {

StateField euler_residual(const Eos& model, const StateField& u) {
  const SpaceTimeGrid& g = u.grid;
  if (g.t.n < 5 || g.x1.n < 5 || g.x2.n < 5) throw GridError("euler_residual: grid too coarse");
  std::array<std::array<Eigen::ArrayXd, 3>, 4> d;
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 3; ++a) d[c][a] = diff(u.comp[c], g, a);
  StateField r(g);
  const Eigen::Index n = Eigen::Index(g.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v1 = u.comp[0][k], v2 = u.comp[1][k], p = u.comp[2][k], s = u.comp[3][k];
    const double ir = 1.0 / rho(model, p, s);
    const double ia = 1.0 / alpha(model, p, s);
    auto X = [&](int c) { return d[c][0][k] + v1 * d[c][1][k] + v2 * d[c][2][k]; };
    r.comp[0][k] = X(0) + ir * d[2][1][k];
    r.comp[1][k] = X(1) + ir * d[2][2][k];
    r.comp[2][k] = X(2) + ia * (d[0][1][k] + d[1][2][k]);
    r.comp[3][k] = X(3);
  }
  return r;
}

}  // namespace ebl
