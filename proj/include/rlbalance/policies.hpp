#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlbalance/policy.hpp"

namespace rlbalance {

inline constexpr std::string_view kRoundRobin = "round_robin";
inline constexpr std::string_view kLeastConnections = "least_connections";
inline constexpr std::string_view kWeighted = "weighted";
inline constexpr std::string_view kRl = "rl";

/// All names accepted on the command line, in canonical order.
const std::vector<std::string>& policy_names();
bool is_known_policy(std::string_view name);

class RoundRobinPolicy final : public Policy {
 public:
  std::string name() const override { return std::string(kRoundRobin); }
  ServerId choose(const ClusterSnapshot& snapshot, const Task& task, Rng& rng) override;

 private:
  std::uint64_t counter_ = 0;
};

/// Fewest in-service plus queued tasks; ties go to the lowest id.
class LeastConnectionsPolicy final : public Policy {
 public:
  std::string name() const override { return std::string(kLeastConnections); }
  ServerId choose(const ClusterSnapshot& snapshot, const Task& task, Rng& rng) override;
};

/// Smooth weighted round-robin (the nginx deficit-counter scheme).
class SmoothWeightedPolicy final : public Policy {
 public:
  /// Throws ValidationError on an empty or non-positive weight list.
  explicit SmoothWeightedPolicy(std::vector<double> weights);

  std::string name() const override { return std::string(kWeighted); }
  ServerId choose(const ClusterSnapshot& snapshot, const Task& task, Rng& rng) override;

  std::span<const double> current() const { return current_; }

 private:
  std::vector<double> weights_;
  std::vector<double> current_;
  double total_ = 0.0;
};

}  // namespace rlbalance
