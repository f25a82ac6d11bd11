// rl-balance: train, run and compare dispatch policies on a simulated
// heterogeneous server pool.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rlbalance/config.hpp"
#include "rlbalance/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void print_report(const rlbalance::CommandReport& report) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << report.table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event load-balancing simulator with a tabular Q-learning dispatcher"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> policy;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> qtable;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config file")->required();
    cmd->add_option("--policy", policy, "round_robin | least_connections | weighted | rl");
    cmd->add_option("--seed", seed, "Master seed (overrides the config's seed list)");
    cmd->add_option("--out", out, "Output directory (overrides out_dir)");
    cmd->add_option("--qtable", qtable, "Trained Q-table to load for the rl policy");
  };
  auto* run_cmd = app.add_subcommand("run", "Simulate one policy on one seed");
  auto* compare_cmd = app.add_subcommand("compare", "Evaluate all configured policies on shared traces");
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat compare across load_multipliers");
  auto* train_cmd = app.add_subcommand("train", "Train the Q-learning agent and persist its table");
  for (auto* cmd : {run_cmd, compare_cmd, sweep_cmd, train_cmd}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    rlbalance::ExperimentConfig config = rlbalance::load_config(config_path);
    if (seed) config.seeds = {*seed};
    const std::filesystem::path out_dir = out ? std::filesystem::path(*out) : config.out_dir;

    if (*run_cmd) {
      const std::string name = policy ? *policy : config.policies.front();
      std::optional<std::filesystem::path> table_path;
      if (qtable) table_path = *qtable;
      print_report(rlbalance::cmd_run(config, name, config.seeds.front(), out_dir, table_path));
    } else if (*compare_cmd) {
      if (policy) config.policies = {*policy};
      print_report(rlbalance::cmd_compare(config, out_dir).report);
    } else if (*sweep_cmd) {
      if (policy) config.policies = {*policy};
      rlbalance::CommandReport report;
      rlbalance::cmd_sweep(config, config.load_multipliers, out_dir, &report);
      print_report(report);
    } else if (*train_cmd) {
      print_report(rlbalance::cmd_train(config, config.seeds.front(), out_dir));
    }
  } catch (const rlbalance::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
