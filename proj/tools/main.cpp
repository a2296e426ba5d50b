#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cubicqn/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverError = 1;
constexpr int kExitConfigError = 2;

struct Overrides {
  std::int64_t seed = -1;
  std::string out_dir;
  int max_iters = -1;
};

void apply_overrides(cubicqn::ExperimentConfig& config, const Overrides& overrides) {
  if (overrides.seed >= 0) config.seed = static_cast<std::uint64_t>(overrides.seed);
  if (!overrides.out_dir.empty()) config.out_dir = overrides.out_dir;
  if (overrides.max_iters >= 0) config.max_iterations = overrides.max_iters;
}

int run_or_compare(const std::string& config_path, const Overrides& overrides,
                   bool write_outputs) {
  cubicqn::ExperimentConfig config;
  try {
    config = cubicqn::load_experiment_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  apply_overrides(config, overrides);

  cubicqn::RunSummary summary;
  try {
    summary = cubicqn::run_experiment(config, write_outputs);
  } catch (const cubicqn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverError;
  }

  cubicqn::print_summary_table(summary, std::cout);
  if (write_outputs) {
    std::cout << "\ntraces and plots written to " << config.out_dir << "/\n";
  }
  for (const cubicqn::MethodOutcome& outcome : summary.methods) {
    if (outcome.status.rfind("error", 0) == 0) return kExitSolverError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cubicqn: cubic regularized quasi-Newton benchmark harness"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path;

  CLI::App* run = app.add_subcommand("run", "run an experiment config and write traces/plots");
  run->add_option("config", config_path, "TOML experiment config")->required();
  run->add_option("--seed", overrides.seed, "override the experiment seed");
  run->add_option("--out-dir", overrides.out_dir, "override the output directory");
  run->add_option("--max-iters", overrides.max_iters, "override the iteration budget");

  CLI::App* check = app.add_subcommand("check", "derivative and invariant self-test");

  CLI::App* compare =
      app.add_subcommand("compare", "run an experiment config, print the summary table only");
  compare->add_option("config", config_path, "TOML experiment config")->required();
  compare->add_option("--seed", overrides.seed, "override the experiment seed");
  compare->add_option("--max-iters", overrides.max_iters, "override the iteration budget");

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) {
    const int failures = cubicqn::run_self_check(std::cout);
    if (failures == 0) {
      std::cout << "all checks passed\n";
      return kExitOk;
    }
    std::cout << failures << " check(s) failed\n";
    return kExitSolverError;
  }
  return run_or_compare(config_path, overrides, run->parsed());
}
