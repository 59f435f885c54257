#include "experiments.hpp"

#include "ebl/cascade.hpp"
#include "ebl/conormal_norms.hpp"
#include "ebl/direct_solver.hpp"
#include "ebl/field_io.hpp"
#include "ebl/ground_state.hpp"
#include "ebl/wkb_assembler.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <random>
#include <sstream>

namespace ebl::cli {

namespace fs = std::filesystem;

std::string Check::threshold() const {
  std::ostringstream os;
  os << std::setprecision(6);
  if (relation == "in")
    os << "in [" << lo << ", " << hi << "]";
  else
    os << relation << ' ' << hi;
  return os.str();
}

bool RunResult::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256: cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, std::size_t(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

namespace {

class Session {
 public:
  explicit Session(const ExperimentConfig& cfg) : cfg_(cfg), dir_(cfg.out) { fs::create_directories(dir_); }

  const ExperimentConfig& cfg() const { return cfg_; }
  RunResult& result() { return res_; }

  void at_most(const std::string& name, double v, double hi) { add({name, v, "<=", 0, hi, v <= hi}); }
  void at_least(const std::string& name, double v, double lo) { add({name, v, ">=", 0, lo, v >= lo}); }
  void within(const std::string& name, double v, double lo, double hi) {
    add({name, v, "in", lo, hi, v >= lo && v <= hi});
  }
  void holds(const std::string& name, bool ok) { add({name, ok ? 1.0 : 0.0, "==", 0, 1, ok}); }

  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

  void text(const std::string& rel, const std::string& body, const std::string& what) {
    std::ofstream out(path(rel), std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + path(rel));
    res_.artifacts.push_back({rel, what});
  }
  template <typename Writer>
  void csv(const std::string& rel, Writer w, const std::string& what) {
    std::ostringstream os;
    os << std::setprecision(10);
    w(os);
    text(rel, os.str(), what);
  }
  void field(const std::string& rel, const FlatField& f, const std::string& what) {
    write_flat_field(path(rel), f);
    res_.artifacts.push_back({rel, what});
  }

  // Expansions are shared between experiments of one "all" run.
  const WkbExpansion& shear(int order) {
    auto& slot = cache_[order];
    if (!slot) slot = std::make_unique<WkbExpansion>(build_shear_expansion(order, cfg_.profile_grid(), nullptr, cfg_.eos));
    return *slot;
  }

 private:
  void add(Check c) { res_.checks.push_back(std::move(c)); }

  const ExperimentConfig& cfg_;
  fs::path dir_;
  RunResult res_;
  std::map<int, std::unique_ptr<WkbExpansion>> cache_;
};

template <typename F>
void stage(const std::string& tag, F f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("[" + tag + "] " + e.what());
  }
}

ScalarMap named_map(const std::string& n) {
  if (n == "identity") return {[](double y) { return y; }, [](double) { return 1.0; }};
  if (n == "square") return {[](double y) { return y * y; }, [](double y) { return 2 * y; }};
  return {[](double y) { return y * y * y; }, [](double y) { return 3 * y * y; }};
}

void require_shear(const ExperimentConfig& c, const std::string& exp) {
  if (c.ground_state.kind != "shear")
    throw ConfigError("ground_state.kind", "experiment " + exp + " is built on the shear ground state");
}

struct Built {
  InitialVelocity h;
  GroundState gs;
};

Built build_ground_state(const ExperimentConfig& c) {
  const GroundStateConfig& g = c.ground_state;
  if (g.kind == "shear") return {build_shear_initial(), make_shear_ground_state(g.p0, g.s0, g.L)};
  Built b{build_recipe_initial(named_map(g.a_init), named_map(g.F)), {}};
  std::vector<Vec2> samples;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) samples.emplace_back(-0.5 * g.L + 0.05 * g.L * i, 0.1 * j);
  b.gs = make_ground_state(b.h, g.p0, g.s0, g.L, estimate_T0(b.h, samples));
  return b;
}

// ---------------------------------------------------------------------------

void ground_state_experiment(Session& s) {
  const ExperimentConfig& c = s.cfg();
  stage("ground_state/build", [&] {
    const Built b = build_ground_state(c);
    const GroundState& gs = b.gs;
    const bool shear = c.ground_state.kind == "shear";
    const double lo1 = shear ? 0.0 : -0.5 * c.ground_state.L;
    const double T = shear ? c.grid.T : gs.T0 / 4;
    const SpaceTimeGrid g{Axis{0, T, 5, false}, Axis{lo1, c.ground_state.L, 16, true}, Axis{0, 1, 9, false}};
    const ProReport pro = verify_pro(gs, g, 1e-10);
    const CondReport cond = verify_cond(gs, g, 1e-10);
    s.at_most("ground_state.pro.accel", pro.accel, 1e-10);
    s.at_most("ground_state.pro.div", pro.div, 1e-10);
    s.at_most("ground_state.pro.grad_p", pro.grad_p, 1e-10);
    s.holds("ground_state.cond", cond.pass);

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(0, 1);
    double inv = 0;
    for (int k = 0; k < 1000; ++k) {
      const double t = T * U(rng);
      const Vec2 x(lo1 + c.ground_state.L * U(rng), U(rng));
      Vec2 xi;
      const Vec2 v = solve_burgers(b.h, t, x, 1e-14, 50, nullptr, &xi);
      inv = std::max(inv, shear ? (v - Vec2(x(1), 0)).norm() : (xi + t * b.h.h(xi) - x).norm());
    }
    s.at_most("ground_state.burgers_inversion", inv, 1e-12);

    std::vector<std::pair<std::string, double>> rows{{"pro_accel", pro.accel},   {"pro_div", pro.div},
                                                     {"pro_grad_p", pro.grad_p}, {"cond_accel", cond.accel},
                                                     {"cond_dp", cond.dp},       {"burgers_inversion", inv},
                                                     {"T0", gs.T0}};
    if (shear) {
      // Centered residual of the sampled shear under two refinements.
      for (int n : {16, 32}) {
        const SpaceTimeGrid f{Axis{0, c.grid.T, n, false}, Axis{0, c.ground_state.L, n, true}, Axis{0, 1, n, false}};
        StateField u(f);
        for (int a = 0; a < n; ++a)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              const Vec2 v = gs.v(f.t.at(a), f.x1.at(i), f.x2.at(j));
              const Eigen::Index k(f.index(a, i, j));
              u.comp[0][k] = v(0);
              u.comp[1][k] = v(1);
              u.comp[2][k] = gs.p_ref;
              u.comp[3][k] = gs.s_ref;
            }
        double r = 0;
        for (const auto& comp : euler_residual(c.eos, u).comp) r = std::max(r, comp.abs().maxCoeff());
        const double dx = f.x2.step();
        s.at_most("ground_state.euler_residual_n" + std::to_string(n), r, 5 * dx * dx);
        rows.emplace_back("euler_residual_n" + std::to_string(n), r);
      }
    } else {
      // Divergence from the analytic Jacobian on a 256^2 grid.
      for (double t : {0.0, gs.T0 / 4}) {
        double div = 0;
        for (int i = 0; i < 256; ++i)
          for (int j = 0; j < 256; ++j) {
            const double x1 = lo1 + c.ground_state.L * (i + 0.5) / 256, x2 = (j + 0.5) / 256;
            div = std::max(div, std::abs(gs.grad_v(t, x1, x2).trace()));
          }
        s.at_most(t == 0 ? "ground_state.div_t0" : "ground_state.div_T0_over_4", div, 1e-6);
        rows.emplace_back(t == 0 ? "div_t0" : "div_T0_over_4", div);
      }
    }
    s.csv("ground_state.csv", [&](std::ostream& os) {
      os << "quantity,value\n";
      for (const auto& [k, v] : rows) os << k << ',' << v << '\n';
    }, "ground-state defects and residuals");
  });
}

FlatField layer_flat(const LayerArray& a, const ProfileGrid& g) {
  FlatField f;
  std::vector<double> t, x1, x2, X;
  for (int n = 0; n < a.nt; ++n) t.push_back(g.t(n));
  for (int i = 0; i < a.n1; ++i) x1.push_back(g.x1.at(i));
  for (int j = 0; j < a.n2; ++j) x2.push_back(a.n2 == 1 ? 0.0 : g.x2_layer.at(j));
  for (int l = 0; l < a.nX; ++l) X.push_back(g.fast.node(l));
  f.axes = {t, x1, x2, X};
  f.data = a.data;
  return f;
}

void layer_experiment(Session& s) {
  const ExperimentConfig& c = s.cfg();
  stage("layer_profiles/entropy", [&] {
    const Built b = build_ground_state(c);
    const bool shear = c.ground_state.kind == "shear";
    ProfileGrid g = c.profile_grid();
    if (!shear) {
      g.x1 = Axis{-0.5 * c.ground_state.L, c.ground_state.L, c.grid.n1, true};
      g.T = std::min(g.T, b.gs.T0 / 4);
    }
    const InitFn init = [](double x1, double, double X) { return std::exp(-X * X) * std::sin(x1); };
    const LayerArray W = solve_entropy_layer(b.gs, init, g);
    s.at_most("layer.tail_ratio", tail_ratio(W), 1e-8);
    s.field("entropy_layer.bin", layer_flat(W, g), "entropy layer W(t, x1, x2, X), flat binary");
    if (!shear) return;

    // Against e^{-X^2} sin(x1 - t x2) over three halvings of (dt, dx1).
    std::vector<std::array<double, 3>> rows;
    for (int k = 0; k < 4; ++k) {
      ProfileGrid h = g;
      h.nt = 8 * (1 << k) + 1;
      h.x1 = Axis{0.0, c.ground_state.L, 32 << k, true};
      h.fast = FastGrid(c.grid.X_max, 81, c.grid.kappa);
      const LayerArray V = solve_entropy_layer(b.gs, init, h);
      double e2 = 0;
      const int n = h.nt - 1;
      for (int i = 0; i < h.x1.n; ++i)
        for (int j = 0; j < h.x2_layer.n; ++j)
          for (int l = 0; l < h.fast.size(); ++l) {
            const double X = h.fast.node(l), x2 = h.x2_layer.at(j);
            e2 += h.fast.weights()[l] * std::pow(V(n, i, j, l) - std::exp(-X * X) * std::sin(h.x1.at(i) - h.T * x2), 2);
          }
      const double err = std::sqrt(e2 * h.x1.step() / h.x2_layer.n);
      rows.push_back({double(h.x1.n), double(h.nt), err});
    }
    s.csv("layer_convergence.csv", [&](std::ostream& os) {
      os << "n1,nt,l2_error,order\n";
      for (std::size_t k = 0; k < rows.size(); ++k) {
        os << rows[k][0] << ',' << rows[k][1] << ',' << rows[k][2] << ',';
        if (k > 0) os << std::log2(rows[k - 1][2] / rows[k][2]);
        os << '\n';
      }
    }, "entropy-layer convergence against the closed-form shear solution");
    for (std::size_t k = 1; k < rows.size(); ++k)
      s.within("layer.order_" + std::to_string(k), std::log2(rows[k - 1][2] / rows[k][2]), 1.8, 2.2);
  });
}

void assemble_experiment(Session& s) {
  const ExperimentConfig& c = s.cfg();
  require_shear(c, "assemble");
  stage("wkb_assembler/assemble", [&] {
    const WkbExpansion& e = s.shear(c.sweep.order);
    const double eps = c.sweep.eps.front();
    const PolarizationCheck pc = check_polarization(e, eps, 0.0);
    s.at_most("assemble.polarization", pc.max_violation, 0.0);

    WkbExpansion planted = e;
    const ProfileGrid& g = e.grid;
    LayerArray P(g.nt, g.x1.n, 1, g.fast.size());
    for (int n = 0; n < g.nt; ++n)
      for (int i = 0; i < g.x1.n; ++i)
        for (int l = 0; l < P.nX; ++l) P(n, i, 0, l) = 1e-3 * std::exp(-g.fast.node(l));
    planted.profiles[0].U.layer[kP] = P;
    s.at_least("assemble.polarization_control", check_polarization(planted, eps, 0.0).max_violation, 9e-4);

    const AssemblyGrid ag = residual_grid(g, eps, c.sweep.per_eps, c.sweep.t_stride);
    const StateField u = assemble(e, eps, ag);
    const SpaceTimeGrid& sg = u.grid;
    FlatField f;
    std::vector<double> comp{0, 1, 2, 3}, t, x1, x2;
    for (int a = 0; a < sg.t.n; ++a) t.push_back(sg.t.at(a));
    for (int i = 0; i < sg.x1.n; ++i) x1.push_back(sg.x1.at(i));
    for (int j = 0; j < sg.x2.n; ++j) x2.push_back(sg.x2.at(j));
    f.axes = {comp, t, x1, x2};
    f.data.resize(4 * Eigen::Index(sg.size()));
    for (int k = 0; k < 4; ++k) f.data.segment(k * Eigen::Index(sg.size()), Eigen::Index(sg.size())) = u.comp[k];
    s.field("assembled.bin", f, "u_a^eps (v1, v2, p, s) at the first sweep eps, flat binary");
  });
  stage("wkb_assembler/k1", [&] {
    const WkbExpansion e = build_shear_with_regular(c.profile_grid(), c.eos);
    std::vector<double> eps;
    for (double x : c.sweep.eps)
      if (x >= 1.0 / 128) eps.push_back(x);
    const GridRule rule{c.sweep.per_eps, c.sweep.t_stride, false, 1e-10};
    const K1Report k = check_nonsingular_reduction(e, eps, rule);
    WkbExpansion bad = e;
    bad.gs = inject_wall_acceleration(e.gs, 0.5);
    const K1Report kb = check_nonsingular_reduction(bad, eps, rule);
    s.at_most("assemble.k1_spread", k.spread, 2.0);
    s.at_least("assemble.k1_control_growth", kb.spread, 4.0);
    s.csv("k1.csv", [&](std::ostream& os) {
      os << "eps,k1_ratio,k1_ratio_control\n";
      for (std::size_t i = 0; i < eps.size(); ++i) os << eps[i] << ',' << k.ratio[i] << ',' << kb.ratio[i] << '\n';
    }, "||K1||_inf / eps with and without the wall acceleration");
  });
}

void residual_experiment(Session& s) {
  const ExperimentConfig& c = s.cfg();
  require_shear(c, "residual-sweep");
  stage("wkb_assembler/residual_sweep", [&] {
    const WkbExpansion& e = s.shear(c.sweep.order);
    const GridRule rule{c.sweep.per_eps, c.sweep.t_stride, c.sweep.refine_check, 1e-10};
    const SweepReport rep = residual_sweep(e, c.sweep.eps, rule);
    s.csv("residual_sweep.csv", [&](std::ostream& os) { write_sweep_csv(rep, os); },
          "L2 and Linf Euler residual of u_a^eps per eps, with the log-log slope");
    const double target = c.sweep.order + 1.5;
    s.within("residual.slope", rep.fit.slope, target - 0.3, target + 0.3);
    s.at_least("residual.r2", rep.fit.r2, 0.98);
    if (c.sweep.refine_check) s.at_most("residual.refinement_change", rep.max_refinement_change, 0.10);
  });
}

void norms_experiment(Session& s) {
  const ExperimentConfig& c = s.cfg();
  stage("conormal_norms/sobolev", [&] {
    const NormParams p{c.norms.m, c.norms.sobolev_lambda, c.grid.T, 1.0};
    const SobolevReport r = check_sobolev_embedding(
        [T = c.grid.T](double eps, int level) { return layer_family(eps, level, T); }, c.norms.eps, p);
    s.csv("sobolev.csv", [&](std::ostream& os) {
      os << "eps,ratio_level0,ratio_level1,control_level0,control_level1\n";
      for (std::size_t i = 0; i < r.eps.size(); ++i)
        os << r.eps[i] << ',' << r.ratio[0][i] << ',' << r.ratio[1][i] << ',' << r.ratio_no_sqrt[0][i] << ','
           << r.ratio_no_sqrt[1][i] << '\n';
    }, "Sobolev embedding ratio on the layer family, with the control without sqrt(eps)");
    s.at_most("norms.sobolev_spread", r.spread, 2.0);
    s.at_least("norms.sobolev_control_growth", r.spread_no_sqrt, 4.0);

    NormReport all;
    for (double eps : c.norms.eps) {
      const NormReport n = evaluate_norms(layer_family(eps, 0, c.grid.T), NormParams{2, c.norms.sobolev_lambda, c.grid.T, eps});
      all.rows.insert(all.rows.end(), n.rows.begin(), n.rows.end());
    }
    s.csv("norms.csv", [&](std::ostream& os) { write_norm_csv(all, os); }, "conormal norms of the layer family (m = 2)");
  });
  stage("conormal_norms/constants", [&] {
    const auto slow = [](int level) { return slow_family(level); };
    const auto osc = [](int level) { return oscillatory_family(level); };
    struct Item {
      std::string name;
      ConstantReport r;
    };
    std::vector<Item> items;
    items.push_back({"gn_slow_k1_l0", check_gagliardo_nirenberg(slow, 1, 0, 2, c.norms.lambda)});
    items.push_back({"gn_slow_k2_l0", check_gagliardo_nirenberg(slow, 2, 0, 2, c.norms.lambda)});
    items.push_back({"gn_osc_k2_l2", check_gagliardo_nirenberg(osc, 2, 2, 2, c.norms.lambda)});
    items.push_back({"moser_square_slow", check_moser([](double x) { return x * x; }, slow, 2, c.norms.lambda)});
    items.push_back({"moser_sin_osc", check_moser([](double x) { return std::sin(x); }, osc, 2, c.norms.lambda)});
    s.csv("constants.csv", [&](std::ostream& os) {
      os << "inequality,lambda,constant_level0,constant_level1\n";
      for (const auto& it : items)
        for (std::size_t i = 0; i < it.r.lambda.size(); ++i)
          os << it.name << ',' << it.r.lambda[i] << ',' << it.r.constant[0][i] << ',' << it.r.constant[1][i] << '\n';
    }, "empirical Gagliardo-Nirenberg and Moser constants per lambda and refinement level");
    for (const auto& it : items) s.at_most("norms." + it.name + "_spread", it.r.spread, 2.0);
  });
}

void stability_experiment(Session& s) {
  const ExperimentConfig& c = s.cfg();
  require_shear(c, "stability");
  stage("direct_solver/stability", [&] {
    const WkbExpansion& e = s.shear(1);
    const StabilityReport rep = stability_sweep(e, c.stability.eps, c.stability.rule);
    s.csv("stability.csv", [&](std::ostream& os) { write_stability_csv(rep, os); },
          "H1 distance between the direct solve and u_a^eps per eps and grid");
    s.holds("stability.complete", rep.complete);
    s.holds("stability.monotone", rep.monotone);
    s.at_least("stability.slope", rep.fit.slope, 0.4);
    if (c.stability.rule.refine_check) s.at_most("stability.refinement_change", rep.max_refinement_change, 0.15);
  });
}

void write_reports(Session& s) {
  RunResult& r = s.result();
  s.csv("checks.csv", [&](std::ostream& os) {
    os << "check,measured,threshold,pass\n";
    for (const auto& c : r.checks) os << c.name << ',' << c.measured << ",\"" << c.threshold() << "\"," << (c.pass ? 1 : 0) << '\n';
  }, "every pass/fail check with threshold and measured value");
  s.text("config.json", to_json(s.cfg()).dump(2) + "\n", "effective configuration");

  std::ostringstream m;
  m << std::setprecision(10);
  for (const auto& a : r.artifacts) m << a.path << '\t' << sha256_file(s.path(a.path)) << '\t' << a.description << '\n';
  for (const auto& c : r.checks)
    m << "check:" << c.name << "\t-\t" << (c.pass ? "PASS" : "FAIL") << " measured=" << c.measured
      << " threshold=" << c.threshold() << '\n';
  std::ofstream out(s.path("manifest.tsv"), std::ios::binary);
  out << m.str();
  if (!out) throw StageError("[cli/manifest] cannot write manifest");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  const std::string& x = cfg.experiment;
  if (x != "ground-state" && x != "layer" && x != "norms" && cfg.ground_state.kind != "shear" && x != "all")
    require_shear(cfg, x);
  Session s(cfg);
  const bool all = x == "all";
  if (all || x == "ground-state") ground_state_experiment(s);
  if (all || x == "layer") layer_experiment(s);
  const bool shear = cfg.ground_state.kind == "shear";
  if ((all && shear) || x == "assemble") assemble_experiment(s);
  if ((all && shear) || x == "residual-sweep") residual_experiment(s);
  if (all || x == "norms") norms_experiment(s);
  if ((all && shear) || x == "stability") stability_experiment(s);
  write_reports(s);
  return s.result();
}

}  // namespace ebl::cli
