#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlbalance {

/// Simulated seconds.
using SimTime = double;
using TaskId = std::uint64_t;
using ServerId = std::size_t;

/// Bad user input: configs, specs, traces, CLI arguments.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Broken engine invariant. Always a bug, never a user error.
class EngineError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Task {
  TaskId id = 0;
  SimTime arrival_time = 0.0;
  double size = 1.0;  // abstract work units
  std::optional<double> deadline_window;

  bool operator==(const Task&) const = default;
};

struct ServerSpec {
  ServerId server_id = 0;
  double speed = 1.0;  // work units per second, per slot
  int slots = 1;
  double weight = 1.0;

  bool operator==(const ServerSpec&) const = default;
};

/// Throws ValidationError unless ids are exactly 0..N-1 and every server
/// has speed > 0, slots >= 1 and weight > 0.
void validate_cluster(const std::vector<ServerSpec>& specs);

struct CompletedTaskRecord {
  TaskId task_id = 0;
  ServerId server_id = 0;
  SimTime arrival_time = 0.0;
  SimTime start_time = 0.0;
  SimTime completion_time = 0.0;
  double response_time = 0.0;
  std::optional<double> deadline_window;

  bool operator==(const CompletedTaskRecord&) const = default;
};

/// What a dispatcher sees at decision time.
struct ClusterSnapshot {
  SimTime now = 0.0;
  std::vector<double> instant_utilization;  // in_service / slots
  std::vector<int> in_service;
  std::vector<int> queue_length;
  int active_tasks = 0;  // in service + queued, whole cluster
  double system_load = 0.0;

  std::size_t num_servers() const { return instant_utilization.size(); }
};

}  // namespace rlbalance
