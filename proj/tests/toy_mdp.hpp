#pragma once

#include "rlbalance/mdp.hpp"

namespace rlbalance::testing {

/// Four states on a ring, two deterministic actions: "step" moves to the next
/// state, "stay" keeps the state. Rewards differ per (state, action) so Q* has
/// no ties.
inline Mdp toy_ring_mdp() {
  Mdp m;
  m.num_states = 4;
  m.num_actions = 2;
  m.transitions.assign(4, std::vector<std::vector<Mdp::Outcome>>(2));
  m.reward.assign(4, std::vector<double>(2, 0.0));
  const double step_reward[4] = {0.0, 0.5, -0.2, 1.0};
  const double stay_reward[4] = {0.1, 0.0, 0.3, -0.5};
  for (std::size_t s = 0; s < 4; ++s) {
    m.transitions[s][0] = {{1.0, (s + 1) % 4}};
    m.transitions[s][1] = {{1.0, s}};
    m.reward[s][0] = step_reward[s];
    m.reward[s][1] = stay_reward[s];
  }
  return m;
}

}  // namespace rlbalance::testing
