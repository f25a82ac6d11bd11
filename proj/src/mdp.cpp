#include "rlbalance/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlbalance/agent.hpp"
#include "rlbalance/random.hpp"

namespace rlbalance {

void Mdp::validate() const {
  if (num_states == 0 || num_actions == 0) throw ValidationError("MDP needs states and actions");
  if (transitions.size() != num_states || reward.size() != num_states) {
    throw ValidationError("MDP tables must have one row per state");
  }
  for (std::size_t s = 0; s < num_states; ++s) {
    if (transitions[s].size() != num_actions || reward[s].size() != num_actions) {
      throw ValidationError("MDP state " + std::to_string(s) + " must list every action");
    }
    for (std::size_t a = 0; a < num_actions; ++a) {
      double total = 0.0;
      for (const auto& o : transitions[s][a]) {
        if (o.next_state >= num_states || o.probability < 0.0) {
          throw ValidationError("MDP transition out of range at state " + std::to_string(s));
        }
        total += o.probability;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("MDP transition probabilities must sum to 1 at state " +
                              std::to_string(s));
      }
    }
  }
}

QMatrix value_iteration(const Mdp& mdp, double gamma, double tolerance) {
  mdp.validate();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must be in [0, 1)");
  if (!(tolerance > 0.0)) throw ValidationError("tolerance must be positive");

  QMatrix q(mdp.num_states, std::vector<double>(mdp.num_actions, 0.0));
  std::vector<double> v(mdp.num_states, 0.0);
  while (true) {
    double change = 0.0;
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      for (std::size_t a = 0; a < mdp.num_actions; ++a) {
        double expected = 0.0;
        for (const auto& o : mdp.transitions[s][a]) expected += o.probability * v[o.next_state];
        const double backed_up = mdp.reward[s][a] + gamma * expected;
        change = std::max(change, std::abs(backed_up - q[s][a]));
        q[s][a] = backed_up;
      }
    }
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      v[s] = *std::max_element(q[s].begin(), q[s].end());
    }
    if (change < tolerance) return q;
  }
}

DiscreteState mdp_state(std::size_t s) {
  return DiscreteState{.util_bins = {static_cast<std::uint16_t>(s)}};
}

QTable learn_mdp(const Mdp& mdp, std::uint64_t steps, double alpha, double gamma, double epsilon,
                 std::uint64_t seed, std::size_t start_state) {
  mdp.validate();
  AgentConfig config;
  config.alpha = alpha;
  config.gamma = gamma;
  Rng explore(seed, Stream::Exploration);
  Rng dynamics(seed, Stream::BurstState);

  QTable table(mdp.num_actions);
  std::size_t s = start_state;
  for (std::uint64_t step = 0; step < steps; ++step) {
    const DiscreteState key = mdp_state(s);
    const std::size_t a = select_action(table, key, epsilon, explore);

    const auto& outcomes = mdp.transitions[s][a];
    std::size_t next = outcomes.back().next_state;
    if (outcomes.size() > 1) {
      double u = dynamics.uniform();
      for (const auto& o : outcomes) {
        if (u < o.probability) {
          next = o.next_state;
          break;
        }
        u -= o.probability;
      }
    }
    update_q(table, key, a, mdp.reward[s][a], mdp_state(next), config);
    s = next;
  }
  return table;
}

QMatrix to_matrix(const QTable& table, std::size_t num_states) {
  QMatrix q(num_states, std::vector<double>(table.num_actions(), 0.0));
  for (std::size_t s = 0; s < num_states; ++s) {
    for (std::size_t a = 0; a < table.num_actions(); ++a) q[s][a] = table.value(mdp_state(s), a);
  }
  return q;
}

double max_norm_distance(const QMatrix& a, const QMatrix& b) {
  if (a.size() != b.size()) throw ValidationError("Q matrices differ in state count");
  double d = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s].size() != b[s].size()) throw ValidationError("Q matrices differ in action count");
    for (std::size_t i = 0; i < a[s].size(); ++i) d = std::max(d, std::abs(a[s][i] - b[s][i]));
  }
  return d;
}

}  // namespace rlbalance
