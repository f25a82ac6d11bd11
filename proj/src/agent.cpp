#include "rlbalance/agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlbalance/simulator.hpp"

namespace rlbalance {

void validate_agent(const AgentConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ValidationError("agent.alpha must be in (0, 1]");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ValidationError("agent.gamma must be in [0, 1)");
  if (!(c.epsilon_start >= 0.0 && c.epsilon_start <= 1.0)) {
    throw ValidationError("agent.epsilon_start must be in [0, 1]");
  }
  if (!(c.epsilon_end >= 0.0 && c.epsilon_end <= 1.0)) {
    throw ValidationError("agent.epsilon_end must be in [0, 1]");
  }
  if (c.epsilon_end > c.epsilon_start) {
    throw ValidationError("agent.epsilon_end must not exceed agent.epsilon_start");
  }
  if (c.epsilon_decay_tasks == 0) throw ValidationError("agent.epsilon_decay_tasks must be positive");
  if (c.util_bins < 1 || c.util_bins > 0xffff) throw ValidationError("agent.util_bins must be positive");
  if (c.active_bins < 1 || c.active_bins > 0xffff) {
    throw ValidationError("agent.active_bins must be positive");
  }
  if (c.queue_bins < 0 || c.queue_bins > 0xffff) {
    throw ValidationError("agent.queue_bins must be non-negative");
  }
  if (!(c.reward.t_ref > 0.0) || !std::isfinite(c.reward.t_ref)) {
    throw ValidationError("agent.reward.t_ref must be positive");
  }
  if (!(c.reward.kappa >= 0.0) || !std::isfinite(c.reward.kappa)) {
    throw ValidationError("agent.reward.kappa must be non-negative");
  }
}

namespace {

std::uint16_t bin_of(double fraction, int bins) {
  const double scaled = std::floor(fraction * bins);
  return static_cast<std::uint16_t>(std::clamp(scaled, 0.0, static_cast<double>(bins - 1)));
}

}  // namespace

DiscreteState discretize(const ClusterSnapshot& snapshot, const AgentConfig& config) {
  DiscreteState s;
  const std::size_t n = snapshot.num_servers();
  s.util_bins.reserve(n);
  for (double u : snapshot.instant_utilization) s.util_bins.push_back(bin_of(u, config.util_bins));
  s.load_bin = bin_of(snapshot.system_load, config.util_bins);
  const int per_server = n == 0 ? 0 : snapshot.active_tasks / static_cast<int>(n);
  s.active_tasks_bin = static_cast<std::uint16_t>(std::min(per_server, config.active_bins - 1));
  if (config.queue_bins > 0) {
    s.queue_bins.reserve(n);
    for (int q : snapshot.queue_length) {
      s.queue_bins.push_back(static_cast<std::uint16_t>(std::min(q, config.queue_bins - 1)));
    }
  }
  return s;
}

std::size_t select_action(const QTable& q, const DiscreteState& s, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) return static_cast<std::size_t>(rng.uniform_index(q.num_actions()));
  return q.best_visited_action(s);
}

double compute_reward(const CompletedTaskRecord& record, const ClusterSnapshot& snapshot,
                      const AgentConfig& config) {
  double imbalance = 0.0;
  if (!snapshot.instant_utilization.empty()) {
    const auto [lo, hi] = std::minmax_element(snapshot.instant_utilization.begin(),
                                              snapshot.instant_utilization.end());
    imbalance = *hi - *lo;
  }
  return -(record.response_time / config.reward.t_ref) - config.reward.kappa * imbalance;
}

double update_q(QTable& q, const DiscreteState& s, std::size_t a, double r,
                const DiscreteState& s_next, const AgentConfig& config) {
  if (!std::isfinite(r)) throw ValidationError("non-finite reward passed to update_q");
  const double current = q.value(s, a);
  const double target = r + config.gamma * q.max_value(s_next);
  const double updated = current + config.alpha * (target - current);
  q.store(s, a, updated);
  return updated;
}

double epsilon_at(const AgentConfig& config, std::uint64_t arrivals_seen) {
  if (arrivals_seen >= config.epsilon_decay_tasks) return config.epsilon_end;
  const double progress =
      static_cast<double>(arrivals_seen) / static_cast<double>(config.epsilon_decay_tasks);
  return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * progress;
}

QLearningPolicy::QLearningPolicy(std::shared_ptr<QTable> table, AgentConfig config, Mode mode)
    : table_(std::move(table)), config_(config), mode_(mode) {
  validate_agent(config_);
  if (!table_) throw EngineError("QLearningPolicy needs a table");
}

ServerId QLearningPolicy::choose(const ClusterSnapshot& snapshot, const Task& task, Rng& rng) {
  if (table_->num_actions() != snapshot.num_servers()) {
    throw EngineError("Q-table has " + std::to_string(table_->num_actions()) +
                      " actions but the cluster has " + std::to_string(snapshot.num_servers()) +
                      " servers");
  }
  DiscreteState s = discretize(snapshot, config_);
  double epsilon = 0.0;
  if (mode_ == Mode::Learn) epsilon = epsilon_at(config_, arrivals_);
  if (mode_ == Mode::Online) epsilon = config_.epsilon_end;
  ++arrivals_;
  const std::size_t action = select_action(*table_, s, epsilon, rng);
  if (mode_ != Mode::Greedy) pending_.emplace(task.id, Pending{std::move(s), action});
  return action;
}

void QLearningPolicy::on_completion(const CompletedTaskRecord& record,
                                    const ClusterSnapshot& snapshot) {
  if (mode_ == Mode::Greedy) return;
  auto it = pending_.find(record.task_id);
  if (it == pending_.end()) throw EngineError("completion for a task the agent never dispatched");
  const double r = compute_reward(record, snapshot, config_);
  update_q(*table_, it->second.state, it->second.action, r, discretize(snapshot, config_), config_);
  pending_.erase(it);

  ++completions_;
  window_.push_back(r);
  if (window_.size() == kCurveWindow) {
    double sum = 0.0;
    for (double x : window_) sum += x;
    curve_.push_back(LearningPoint{completions_, sum / static_cast<double>(window_.size())});
    window_.clear();
  }
}

TrainResult train(const std::vector<ServerSpec>& cluster, std::span<const Task> trace,
                  const AgentConfig& config, std::uint64_t seed) {
  validate_agent(config);
  validate_cluster(cluster);
  auto table = std::make_shared<QTable>(cluster.size());
  if (trace.empty()) return TrainResult{QTable(cluster.size()), {}};

  QLearningPolicy agent(table, config, QLearningPolicy::Mode::Learn);
  const SimTime horizon = std::max(trace.back().arrival_time, 1.0);
  RunOptions options;
  options.sample_interval = 0.0;
  run(cluster, trace, agent, horizon, seed, options);
  return TrainResult{std::move(*table), agent.learning_curve()};
}

}  // namespace rlbalance
