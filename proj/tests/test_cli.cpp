#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "config.hpp"
#include "experiments.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace ebl::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal(const std::string& experiment = "ground-state") {
  return json{{"experiment", experiment}, {"eos", {{"gamma", 1.4}}}, {"ground_state", {{"kind", "shear"}}}};
}

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path;
  }
  return "<none>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ebl_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(EBL_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("schema errors name the offending key") {
  CHECK(error_path(json::object()) == "experiment");
  json j = minimal();
  j.erase("eos");
  CHECK(error_path(j) == "eos");
  j = minimal();
  j["eos"].erase("gamma");
  CHECK(error_path(j) == "eos.gamma");
  j = minimal();
  j["grid"] = {{"n1", 64}, {"bogus", 1}};
  CHECK(error_path(j) == "grid.bogus");
  j = minimal();
  j["colour"] = "red";
  CHECK(error_path(j) == "colour");
  j = minimal();
  j["grid"] = {{"n1", "64"}};
  CHECK(error_path(j) == "grid.n1");
  j = minimal();
  j["sweep"] = {{"eps", {0.1, 1.5, 0.01}}};
  CHECK(error_path(j) == "sweep.eps[1]");
  j = minimal();
  j["sweep"] = {{"eps", {0.1, 0.05}}};
  CHECK(error_path(j) == "sweep.eps");
  j = minimal();
  j["sweep"] = {{"t_stride", 5}};
  CHECK(error_path(j) == "sweep.t_stride");
  j = minimal("everything");
  CHECK(error_path(j) == "experiment");
  j = minimal();
  j["eos"]["gamma"] = 1.0;
  CHECK(error_path(j) == "eos.gamma");
  j = minimal();
  j["ground_state"]["kind"] = "vortex";
  CHECK(error_path(j) == "ground_state.kind");
  CHECK(error_path(minimal()) == "<none>");
}

TEST_CASE("config round trip and quick mode") {
  json j = minimal("residual-sweep");
  j["grid"] = {{"n1", 64}, {"nt", 17}};
  j["sweep"] = {{"order", 1}, {"eps", {0.25, 0.125, 0.0625}}};
  j["stability"] = {{"n1", 16}, {"max_n2", 512}};
  j["seed"] = 7;
  const ExperimentConfig c = parse_config(j);
  CHECK(c.grid.n1 == 64);
  CHECK(c.sweep.order == 1);
  CHECK(c.stability.rule.max_n2 == 512);
  CHECK(c.seed == 7);
  const ExperimentConfig d = parse_config(to_json(c));
  CHECK(to_json(d) == to_json(c));

  ExperimentConfig q = c;
  make_quick(q);
  CHECK(q.grid.n1 == 32);
  CHECK(q.grid.nt == 9);
  CHECK((q.grid.nt - 1) % q.sweep.t_stride == 0);

  // Experiments other than ground-state, layer and norms need the shear.
  json r = minimal("stability");
  r["ground_state"]["kind"] = "recipe";
  CHECK_THROWS_AS(run_experiment(parse_config(r)), ConfigError);
}

TEST_CASE("sha256") {
  const fs::path p = scratch("abc.txt");
  std::ofstream(p) << "abc";
  CHECK(sha256_file(p.string()) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove(p);
}

TEST_CASE("runs are deterministic and every check reaches the manifest") {
  ExperimentConfig c = parse_config(minimal());
  const fs::path A = scratch("a"), B = scratch("b");
  c.out = A.string();
  const RunResult a = run_experiment(c);
  c.out = B.string();
  const RunResult b = run_experiment(c);
  CHECK(a.all_pass());
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (const auto& art : a.artifacts) {
    if (art.path == "config.json") continue;  // records the output directory
    INFO(art.path);
    CHECK(slurp(A / art.path) == slurp(B / art.path));
  }

  const std::string manifest = slurp(B / "manifest.tsv");
  for (const auto& chk : b.checks) CHECK(manifest.find("check:" + chk.name + "\t") != std::string::npos);
  std::istringstream lines(manifest);
  std::string line;
  int files = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("check:", 0) == 0) continue;
    const auto t1 = line.find('\t'), t2 = line.find('\t', t1 + 1);
    REQUIRE(t2 != std::string::npos);
    CHECK(line.substr(t1 + 1, t2 - t1 - 1) == sha256_file((B / line.substr(0, t1)).string()));
    ++files;
  }
  CHECK(files == int(b.artifacts.size()));
  fs::remove_all(A);
  fs::remove_all(B);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  fs::create_directories(dir);
  std::ofstream(dir / "empty.json") << "{}";
  CHECK(run_cli("--config " + (dir / "empty.json").string()) == kConfigError);
  std::ofstream(dir / "broken.json") << "{ \"experiment\": ";
  CHECK(run_cli("--config " + (dir / "broken.json").string()) == kConfigError);
  CHECK(run_cli("--config " + (dir / "missing.json").string()) == kConfigError);

  std::ofstream(dir / "gs.json") << minimal().dump();
  CHECK(run_cli("--config " + (dir / "gs.json").string() + " --out " + (dir / "gs").string()) == kOk);
  CHECK(fs::exists(dir / "gs" / "manifest.tsv"));
  CHECK(run_cli("--config " + (dir / "gs.json").string() + " --experiment bogus") == kConfigError);

  // Two neighbouring eps cannot show the required growth of the control: a check failure.
  json few = minimal("norms");
  few["norms"] = {{"eps", {0.25, 0.125}}, {"lambda", {1}}};
  std::ofstream(dir / "few.json") << few.dump();
  CHECK(run_cli("--config " + (dir / "few.json").string() + " --out " + (dir / "few").string()) == kCheckFailed);

  // A pressure floor above the shear pressure fails admissibility: a compute error.
  json bad = minimal("residual-sweep");
  bad["eos"]["p_min"] = 2.0;
  bad["grid"] = {{"nt", 9}, {"n1", 16}};
  bad["sweep"] = {{"eps", {0.25, 0.125, 0.0625}}, {"refine_check", false}};
  std::ofstream(dir / "bad.json") << bad.dump();
  CHECK(run_cli("--config " + (dir / "bad.json").string() + " --out " + (dir / "bad").string()) == kComputeError);
  fs::remove_all(dir);
}
