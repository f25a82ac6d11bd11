#pragma once

#include <cstdint>
#include <vector>

#include "rlbalance/qtable.hpp"

namespace rlbalance {

/// Explicit finite MDP, used to check the learner against exact values.
struct Mdp {
  struct Outcome {
    double probability = 1.0;
    std::size_t next_state = 0;
  };

  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  /// transitions[s][a]: distribution over next states (probabilities sum to 1).
  std::vector<std::vector<std::vector<Outcome>>> transitions;
  /// reward[s][a]: expected immediate reward.
  std::vector<std::vector<double>> reward;

  void validate() const;
};

using QMatrix = std::vector<std::vector<double>>;

/// Bellman optimality backups until the max-norm change drops below
/// `tolerance`. Requires gamma in [0, 1).
QMatrix value_iteration(const Mdp& mdp, double gamma, double tolerance);

/// Maps an MDP state index onto the agent's state key.
DiscreteState mdp_state(std::size_t s);

/// Runs `steps` epsilon-greedy Q-learning updates on a single trajectory
/// from `start_state`, using the same select_action/update_q as the load
/// balancer. Rewards are taken as the MDP's expected reward.
QTable learn_mdp(const Mdp& mdp, std::uint64_t steps, double alpha, double gamma, double epsilon,
                 std::uint64_t seed, std::size_t start_state = 0);

QMatrix to_matrix(const QTable& table, std::size_t num_states);
double max_norm_distance(const QMatrix& a, const QMatrix& b);

}  // namespace rlbalance
