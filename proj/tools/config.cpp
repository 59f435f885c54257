#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace ebl::cli {

using nlohmann::json;

namespace {

// Reads one object, remembering which keys were consumed so leftovers can be rejected.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k); }

  void require(const std::string& k) {
    if (!has(k)) throw ConfigError(key(k), "missing required key");
  }

  template <typename T, typename Check>
  void get(const std::string& k, T& out, Check ok, const char* what) {
    seen_.insert(k);
    if (!has(k)) return;
    const json& v = j_.at(k);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key(k), "expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
    } else {
      if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    }
    out = v.get<T>();
    if (!ok(out)) throw ConfigError(key(k), what);
  }

  void get_list(const std::string& k, std::vector<double>& out, double lo, double hi, std::size_t min_len) {
    seen_.insert(k);
    if (!has(k)) return;
    const json& v = j_.at(k);
    if (!v.is_array()) throw ConfigError(key(k), "expected an array of numbers");
    if (v.size() < min_len) throw ConfigError(key(k), "needs at least " + std::to_string(min_len) + " entries");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = key(k) + "[" + std::to_string(i) + "]";
      if (!v[i].is_number()) throw ConfigError(p, "expected a number");
      const double x = v[i].get<double>();
      if (!(x > lo && x <= hi)) throw ConfigError(p, "outside (" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      out.push_back(x);
    }
  }

  Block sub(const std::string& k) {
    seen_.insert(k);
    static const json empty = json::object();
    return Block(has(k) ? j_.at(k) : empty, key(k));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

auto positive = [](auto x) { return x > 0; };
auto any = [](auto) { return true; };

}  // namespace

ProfileGrid ExperimentConfig::profile_grid() const {
  ProfileGrid g;
  g.T = grid.T;
  g.nt = grid.nt;
  g.x1 = Axis{0.0, ground_state.L, grid.n1, true};
  g.x2_reg = Axis{0.0, grid.x2_reg_max, grid.x2_reg_n, false};
  g.fast = FastGrid(grid.X_max, grid.nX, grid.kappa);
  return g;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Block root(j, "");
  root.require("experiment");
  root.get("experiment", c.experiment,
           [](const std::string& s) { return std::find(kExperiments.begin(), kExperiments.end(), s) != kExperiments.end(); },
           "unknown experiment (ground-state, layer, assemble, residual-sweep, norms, stability, all)");

  root.require("eos");
  {
    Block b = root.sub("eos");
    b.require("gamma");
    b.get("gamma", c.eos.gamma, [](double g) { return g > 1; }, "gamma must exceed 1");
    b.get("p_min", c.eos.p_min, positive, "must be positive");
    b.finish();
  }

  root.require("ground_state");
  {
    Block b = root.sub("ground_state");
    b.require("kind");
    b.get("kind", c.ground_state.kind, [](const std::string& s) { return s == "shear" || s == "recipe"; },
          "expected shear or recipe");
    const auto map_name = [](const std::string& s) { return s == "identity" || s == "square" || s == "cube"; };
    b.get("a_init", c.ground_state.a_init, map_name, "expected identity, square or cube");
    b.get("F", c.ground_state.F, map_name, "expected identity, square or cube");
    b.get("p0", c.ground_state.p0, positive, "must be positive");
    b.get("s0", c.ground_state.s0, any, "");
    b.get("L", c.ground_state.L, positive, "must be positive");
    b.finish();
  }
  if (c.ground_state.kind == "recipe" && j.at("ground_state").contains("L") == false) c.ground_state.L = 2.0;

  {
    Block b = root.sub("grid");
    GridConfig& g = c.grid;
    b.get("T", g.T, positive, "must be positive");
    b.get("nt", g.nt, [](int n) { return n >= 3; }, "needs at least 3 snapshots");
    b.get("n1", g.n1, [](int n) { return n >= 8; }, "needs at least 8 nodes");
    b.get("x2_reg_n", g.x2_reg_n, [](int n) { return n >= 9; }, "needs at least 9 nodes");
    b.get("x2_reg_max", g.x2_reg_max, [](double h) { return h >= 1; }, "must cover the strip [0, 1]");
    b.get("X_max", g.X_max, positive, "must be positive");
    b.get("nX", g.nX, [](int n) { return n >= 9; }, "needs at least 9 nodes");
    b.get("kappa", g.kappa, positive, "must be positive");
    b.finish();
  }
  {
    Block b = root.sub("sweep");
    SweepConfig& s = c.sweep;
    b.get("order", s.order, [](int n) { return n == 0 || n == 1; }, "supported orders are 0 and 1");
    b.get_list("eps", s.eps, 0.0, 1.0, 3);
    b.get("per_eps", s.per_eps, [](int n) { return n >= 8; }, "must be at least 8");
    b.get("t_stride", s.t_stride, positive, "must be positive");
    b.get("refine_check", s.refine_check, any, "");
    b.finish();
  }
  {
    Block b = root.sub("norms");
    NormsConfig& n = c.norms;
    b.get("m", n.m, [](int m) { return m >= 1 && m <= 12; }, "must lie in [1, 12]");
    b.get_list("lambda", n.lambda, 0.0, 1e3, 1);
    b.get("sobolev_lambda", n.sobolev_lambda, positive, "must be positive");
    b.get_list("eps", n.eps, 0.0, 1.0, 2);
    b.finish();
  }
  {
    Block b = root.sub("stability");
    StabilityConfig& s = c.stability;
    b.get_list("eps", s.eps, 0.0, 1.0, 3);
    SimGridRule& r = s.rule;
    b.get("n1", r.n1, [](int n) { return n >= 4; }, "needs at least 4 cells");
    b.get("per_eps", r.per_eps, [](int n) { return n >= 8; }, "must be at least 8");
    b.get("H", r.H, positive, "must be positive");
    b.get("cfl", r.cfl, [](double x) { return x > 0 && x <= 0.45; }, "must lie in (0, 0.45]");
    b.get("t_stride", r.t_stride, positive, "must be positive");
    b.get("refine_check", r.refine_check, any, "");
    b.get("max_n1", r.max_n1, positive, "must be positive");
    b.get("max_n2", r.max_n2, positive, "must be positive");
    b.finish();
  }
  root.get("out", c.out, [](const std::string& s) { return !s.empty(); }, "must be non-empty");
  root.get("seed", c.seed, any, "");
  root.finish();

  if ((c.grid.nt - 1) % c.sweep.t_stride != 0) throw ConfigError("sweep.t_stride", "must divide grid.nt - 1");
  if ((c.grid.nt - 1) % c.stability.rule.t_stride != 0) throw ConfigError("stability.t_stride", "must divide grid.nt - 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  const SimGridRule& r = c.stability.rule;
  return json{
      {"experiment", c.experiment},
      {"eos", {{"gamma", c.eos.gamma}, {"p_min", c.eos.p_min}}},
      {"ground_state",
       {{"kind", c.ground_state.kind},
        {"a_init", c.ground_state.a_init},
        {"F", c.ground_state.F},
        {"p0", c.ground_state.p0},
        {"s0", c.ground_state.s0},
        {"L", c.ground_state.L}}},
      {"grid",
       {{"T", c.grid.T},
        {"nt", c.grid.nt},
        {"n1", c.grid.n1},
        {"x2_reg_n", c.grid.x2_reg_n},
        {"x2_reg_max", c.grid.x2_reg_max},
        {"X_max", c.grid.X_max},
        {"nX", c.grid.nX},
        {"kappa", c.grid.kappa}}},
      {"sweep",
       {{"order", c.sweep.order},
        {"eps", c.sweep.eps},
        {"per_eps", c.sweep.per_eps},
        {"t_stride", c.sweep.t_stride},
        {"refine_check", c.sweep.refine_check}}},
      {"norms", {{"m", c.norms.m}, {"lambda", c.norms.lambda}, {"sobolev_lambda", c.norms.sobolev_lambda}, {"eps", c.norms.eps}}},
      {"stability",
       {{"eps", c.stability.eps},
        {"n1", r.n1},
        {"per_eps", r.per_eps},
        {"H", r.H},
        {"cfl", r.cfl},
        {"t_stride", r.t_stride},
        {"refine_check", r.refine_check},
        {"max_n1", r.max_n1},
        {"max_n2", r.max_n2}}},
      {"out", c.out},
      {"seed", c.seed}};
}

void make_quick(ExperimentConfig& c) {
  c.grid.nt = (c.grid.nt - 1) / 2 + 1;
  c.grid.n1 = std::max(8, c.grid.n1 / 2);
  c.grid.x2_reg_n = (c.grid.x2_reg_n - 1) / 2 + 1;
  c.grid.nX = (c.grid.nX - 1) / 2 + 1;
  c.sweep.per_eps = std::max(8, c.sweep.per_eps / 2);
  c.sweep.t_stride = std::max(1, c.sweep.t_stride / 2);
  c.stability.rule.n1 = std::max(4, c.stability.rule.n1 / 2);
  c.stability.rule.per_eps = std::max(8, c.stability.rule.per_eps / 2);
  c.stability.rule.t_stride = std::max(1, c.stability.rule.t_stride / 2);
}

}  // namespace ebl::cli
