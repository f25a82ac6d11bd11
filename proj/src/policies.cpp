#include "rlbalance/policies.hpp"

#include <algorithm>
#include <cmath>

namespace rlbalance {

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{std::string(kRoundRobin),
                                              std::string(kLeastConnections),
                                              std::string(kWeighted), std::string(kRl)};
  return names;
}

bool is_known_policy(std::string_view name) {
  const auto& names = policy_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ServerId RoundRobinPolicy::choose(const ClusterSnapshot& snapshot, const Task&, Rng&) {
  return static_cast<ServerId>(counter_++ % snapshot.num_servers());
}

ServerId LeastConnectionsPolicy::choose(const ClusterSnapshot& snapshot, const Task&, Rng&) {
  ServerId best = 0;
  int best_count = snapshot.in_service[0] + snapshot.queue_length[0];
  for (ServerId i = 1; i < snapshot.num_servers(); ++i) {
    const int count = snapshot.in_service[i] + snapshot.queue_length[i];
    if (count < best_count) {
      best = i;
      best_count = count;
    }
  }
  return best;
}

SmoothWeightedPolicy::SmoothWeightedPolicy(std::vector<double> weights)
    : weights_(std::move(weights)), current_(weights_.size(), 0.0) {
  if (weights_.empty()) throw ValidationError("weighted policy needs at least one weight");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("weights must be positive and finite");
    total_ += w;
  }
}

ServerId SmoothWeightedPolicy::choose(const ClusterSnapshot& snapshot, const Task&, Rng&) {
  if (snapshot.num_servers() != weights_.size()) {
    throw EngineError("weighted policy configured for " + std::to_string(weights_.size()) +
                      " servers, cluster has " + std::to_string(snapshot.num_servers()));
  }
  ServerId best = 0;
  for (ServerId i = 0; i < weights_.size(); ++i) {
    current_[i] += weights_[i];
    if (current_[i] > current_[best]) best = i;
  }
  current_[best] -= total_;
  return best;
}

}  // namespace rlbalance
