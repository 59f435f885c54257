#include "config.hpp"
#include "experiments.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

using namespace ebl::cli;

int main(int argc, char** argv) {
  CLI::App app{"Entropy boundary layer experiments"};
  std::string config_path, out, experiment;
  std::optional<std::uint64_t> seed;
  bool quick = false;
  app.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--seed", seed, "seed for randomized checks (overrides the config)");
  app.add_option("--experiment", experiment, "experiment to run (overrides the config)")
      ->check(CLI::IsMember(kExperiments));
  app.add_flag("--quick", quick, "halve resolutions for smoke runs");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (!out.empty()) cfg.out = out;
  if (seed) cfg.seed = *seed;
  if (!experiment.empty()) cfg.experiment = experiment;
  if (quick) make_quick(cfg);

  try {
    const RunResult r = run_experiment(cfg);
    for (const auto& c : r.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured " << c.measured << "  threshold "
                << c.threshold() << '\n';
    std::cout << "artifacts and manifest in " << cfg.out << '\n';
    return r.all_pass() ? kOk : kCheckFailed;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "compute error: " << e.what() << '\n';
    return kComputeError;
  }
}
