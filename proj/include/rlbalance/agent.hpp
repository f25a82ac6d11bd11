#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "rlbalance/metrics.hpp"
#include "rlbalance/policy.hpp"
#include "rlbalance/qtable.hpp"
#include "rlbalance/random.hpp"
#include "rlbalance/types.hpp"

namespace rlbalance {

struct RewardConfig {
  double t_ref = 1.0;  // seconds; response time that costs one unit of reward
  double kappa = 0.5;  // weight of the utilization-imbalance penalty
};

struct AgentConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon_start = 0.2;
  double epsilon_end = 0.01;
  std::uint64_t epsilon_decay_tasks = 1;
  int util_bins = 3;
  int active_bins = 4;
  /// Per-server wait-queue bins min(queue_length, Q-1); 0 leaves them out of
  /// the state entirely.
  int queue_bins = 3;
  RewardConfig reward;
  /// Whether the evaluation agent keeps learning (epsilon_end, updates on)
  /// or runs the frozen greedy policy.
  bool learn_during_evaluation = true;
};

/// Throws ValidationError naming the first offending field.
void validate_agent(const AgentConfig& config);

/// Per-server utilization bins, the per-server active-task bin and the load bin.
DiscreteState discretize(const ClusterSnapshot& snapshot, const AgentConfig& config);

/// Epsilon-greedy over the table's row for `s`. Draws one uniform for the
/// explore/exploit coin and one index only when exploring.
std::size_t select_action(const QTable& q, const DiscreteState& s, double epsilon, Rng& rng);

/// -(response_time / t_ref) - kappa * (max - min instantaneous utilization).
double compute_reward(const CompletedTaskRecord& record, const ClusterSnapshot& snapshot_at_completion,
                      const AgentConfig& config);

/// One temporal-difference backup:
///   Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
/// Returns the stored value. Throws ValidationError on a non-finite reward.
double update_q(QTable& q, const DiscreteState& s, std::size_t a, double r,
                const DiscreteState& s_next, const AgentConfig& config);

/// Linear decay from epsilon_start to epsilon_end over epsilon_decay_tasks
/// arrivals, flat afterwards.
double epsilon_at(const AgentConfig& config, std::uint64_t arrivals_seen);

struct LearningPoint {
  std::uint64_t tasks_seen = 0;  // completions so far
  double mean_reward_window = 0.0;
};

/// Q-learning dispatcher. The (state, action) pair is remembered at dispatch
/// and credited when that task completes, with s' observed right after the
/// completion.
class QLearningPolicy final : public Policy {
 public:
  /// Learn: decaying epsilon, updates on. Online: epsilon_end, updates on.
  /// Greedy: epsilon 0, table frozen.
  enum class Mode { Learn, Online, Greedy };

  QLearningPolicy(std::shared_ptr<QTable> table, AgentConfig config, Mode mode);

  std::string name() const override { return "rl"; }
  ServerId choose(const ClusterSnapshot& snapshot, const Task& task, Rng& rng) override;
  void on_completion(const CompletedTaskRecord& record, const ClusterSnapshot& snapshot) override;

  const QTable& table() const { return *table_; }
  std::shared_ptr<QTable> shared_table() const { return table_; }
  const std::vector<LearningPoint>& learning_curve() const { return curve_; }
  std::uint64_t arrivals_seen() const { return arrivals_; }

  static constexpr std::size_t kCurveWindow = 1000;

 private:
  struct Pending {
    DiscreteState state;
    std::size_t action = 0;
  };

  std::shared_ptr<QTable> table_;
  AgentConfig config_;
  Mode mode_;
  std::unordered_map<TaskId, Pending> pending_;
  std::uint64_t arrivals_ = 0;
  std::uint64_t completions_ = 0;
  std::vector<double> window_;
  std::vector<LearningPoint> curve_;
};

struct TrainResult {
  QTable q;
  std::vector<LearningPoint> learning_curve;
};

/// Runs the agent in the loop over the whole trace (horizon = last arrival)
/// and returns the learned table plus the trailing-window reward curve.
TrainResult train(const std::vector<ServerSpec>& cluster, std::span<const Task> trace,
                  const AgentConfig& config, std::uint64_t seed);

}  // namespace rlbalance
