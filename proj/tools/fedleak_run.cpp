#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fedleak/experiments.hpp"

namespace ex = fedleak::experiments;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfigError = 2, kDivergence = 3 };

int report(const ex::ConfigError& e, const std::string& source) {
  for (const auto& d : e.diagnostics()) std::cerr << ex::format_diagnostic(d, source) << "\n";
  return kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs federated-learning leakage experiments and writes CSV/JSON results."};
  std::string config_path, scenario, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> rho, theta, sigma_z2, corrupt_frac;
  std::optional<int> nodes, iters, trials;
  bool validate_only = false, list = false, print_config = false;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--scenario", scenario, "scenario id (uses its preset when no config is given)");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--rho", rho, "override protocol.rho");
  app.add_option("--theta", theta, "override protocol.theta");
  app.add_option("--sigma-z2", sigma_z2, "override protocol.sigma_z2");
  app.add_option("--nodes", nodes, "override graph.nodes");
  app.add_option("--iters", iters, "override protocol.t_max");
  app.add_option("--corrupt-frac", corrupt_frac, "override adversary.corrupt_fraction");
  app.add_option("--trials", trials, "override adversary.trials");
  app.add_flag("--validate", validate_only, "check the config and exit");
  app.add_flag("--print-config", print_config, "print the resolved config and exit");
  app.add_flag("--list-scenarios", list, "print the scenario ids and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& id : ex::scenario_ids()) std::cout << id << "\n";
    return kOk;
  }

  const std::string source = config_path.empty() ? "<preset>" : config_path;
  ex::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = ex::load_config(config_path);
      if (!scenario.empty() && scenario != cfg.scenario)
        throw ex::ConfigError({{0, "scenario",
                                "--scenario " + scenario + " disagrees with the config's " +
                                    cfg.scenario}});
    } else if (!scenario.empty()) {
      cfg = ex::preset(scenario);
    } else {
      std::cerr << "error: give --config or --scenario\n";
      return kConfigError;
    }
    if (seed) cfg.seed = *seed;
    if (rho) cfg.protocol.rho = *rho;
    if (theta) cfg.protocol.theta = *theta;
    if (sigma_z2) cfg.protocol.sigma_z2 = *sigma_z2;
    if (nodes) cfg.graph.nodes = *nodes;
    if (iters) cfg.protocol.t_max = *iters;
    if (corrupt_frac) cfg.adversary.corrupt_fraction = *corrupt_frac;
    if (trials) cfg.adversary.trials = *trials;
    if (auto diags = ex::check_config(cfg); !diags.empty()) throw ex::ConfigError(diags);
  } catch (const ex::ConfigError& e) {
    return report(e, source);
  }

  if (validate_only) {
    std::cout << "ok\n";
    return kOk;
  }
  if (print_config) {
    std::cout << ex::to_json(cfg) << "\n";
    return kOk;
  }

  try {
    const auto result = ex::run_scenario(cfg);
    for (const auto& path : ex::write_outputs(result, out_dir)) std::cout << path.string() << "\n";
  } catch (const ex::ConfigError& e) {
    return report(e, source);
  } catch (const fedleak::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
