#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlbalance/agent.hpp"
#include "rlbalance/config.hpp"
#include "rlbalance/metrics.hpp"
#include "rlbalance/policy.hpp"

namespace rlbalance {

/// Unknown policy name; maps to the usage exit code.
class UnknownPolicyError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Evaluation trace for a master seed.
TaskTrace evaluation_trace(const ExperimentConfig& config, std::uint64_t seed);
/// The first `training_tasks` arrivals of a workload drawn from a seed family
/// disjoint from evaluation_trace's.
std::vector<Task> training_trace(const ExperimentConfig& config, std::uint64_t seed);

/// Builds a baseline policy by name. `rl` is not constructible here because
/// it needs a table; use make_rl_policy.
std::unique_ptr<Policy> make_baseline(const std::string& name, const std::vector<ServerSpec>& cluster);

struct Cell {
  RunResult result;
  RunSummary summary;
  std::vector<LearningPoint> learning_curve;  // rl only, when trained in-cell
  std::shared_ptr<const QTable> table;        // rl only
};

/// One (policy, seed) evaluation on `trace`. For rl, `pretrained` is used
/// when given; otherwise the agent is trained first on training_trace().
Cell evaluate_cell(const ExperimentConfig& config, const std::string& policy,
                   std::uint64_t seed, const std::vector<Task>& trace,
                   const QTable* pretrained = nullptr);

/// Number of worker threads: RL_BALANCE_THREADS if set and positive,
/// otherwise the hardware concurrency.
unsigned worker_threads();
/// Runs jobs[0..n) across worker_threads(); exceptions rethrow in index order.
void run_parallel(std::size_t n, const std::function<void(std::size_t)>& job);

std::string learning_curve_csv(const std::vector<LearningPoint>& curve);

struct CommandReport {
  std::vector<std::string> warnings;
  std::string table;  // human-readable summary for stdout
};

CommandReport cmd_run(const ExperimentConfig& config, const std::string& policy, std::uint64_t seed,
                      const std::filesystem::path& out_dir,
                      const std::optional<std::filesystem::path>& qtable_path);

struct CompareResult {
  std::vector<Cell> cells;  // seed-major, policies in config order
  CommandReport report;
};

/// Every policy on the same per-seed evaluation trace. Writes per-cell CSVs,
/// summary.json and (for rl) learning_curve_<seed>.csv into out_dir when
/// out_dir is non-empty.
CompareResult cmd_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct SweepRow {
  double load_multiplier = 0.0;
  RunSummary summary;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// cmd_compare at each arrival-rate multiplier; writes sweep.csv.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config, const std::vector<double>& multipliers,
                                const std::filesystem::path& out_dir, CommandReport* report = nullptr);

/// Trains on `training_tasks` arrivals; writes qtable.txt and learning_curve.csv.
CommandReport cmd_train(const ExperimentConfig& config, std::uint64_t seed,
                        const std::filesystem::path& out_dir, TrainResult* trained = nullptr);

/// Median-over-seeds table sorted by mean response time.
std::string ranked_table(const std::vector<RunSummary>& summaries);

double median(std::vector<double> values);

}  // namespace rlbalance
