#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlbalance/metrics.hpp"
#include "rlbalance/policy.hpp"
#include "rlbalance/types.hpp"

namespace rlbalance {

struct RunOptions {
  /// Utilization sampling cadence in simulated seconds; samples at k*interval
  /// for k >= 1 up to the horizon. Zero disables sampling.
  double sample_interval = 1.0;
  /// Check conservation and work-conservation after every event (slow).
  bool check_invariants = false;
};

/// Throws ValidationError unless ids strictly increase, arrival times are
/// finite, non-negative and non-decreasing, and every size is positive.
void validate_trace(std::span<const Task> trace);

/// Simulates one run. Arrivals after `horizon` are ignored; completions of
/// admitted tasks are processed to the end even past the horizon. The
/// policy's exploration stream is seeded from `seed`.
RunResult run(const std::vector<ServerSpec>& cluster_config, std::span<const Task> trace,
              Policy& policy, SimTime horizon, std::uint64_t seed, const RunOptions& options = {});

}  // namespace rlbalance
