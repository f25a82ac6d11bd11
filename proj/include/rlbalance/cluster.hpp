#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "rlbalance/types.hpp"

namespace rlbalance {

struct InService {
  Task task;
  SimTime start_time = 0.0;
  SimTime end_time = 0.0;
};

/// One server: spec plus live FIFO/slot accounting.
///
/// busy_work_time counts occupied slot-seconds inside [0, accounting_horizon];
/// accrue() must be called with the current time before any change to
/// in_service.
struct ServerState {
  ServerSpec spec;
  std::vector<InService> in_service;
  std::deque<Task> wait_queue;
  double busy_work_time = 0.0;
  SimTime last_accrual = 0.0;

  void accrue(SimTime now, SimTime accounting_horizon);
  /// Busy slot-seconds up to `t` (>= last_accrual) without mutating.
  double busy_time_at(SimTime t, SimTime accounting_horizon) const;
  bool has_free_slot() const { return static_cast<int>(in_service.size()) < spec.slots; }
  int active() const { return static_cast<int>(in_service.size() + wait_queue.size()); }
};

struct ScheduledCompletion {
  SimTime time = 0.0;
  ServerId server_id = 0;
  TaskId task_id = 0;
};

struct CompletionOutcome {
  CompletedTaskRecord record;
  std::optional<ScheduledCompletion> next;
};

class Cluster {
 public:
  explicit Cluster(const std::vector<ServerSpec>& specs,
                   SimTime accounting_horizon = std::numeric_limits<double>::infinity());

  /// Starts the task on `target` if a slot is free (returning its completion),
  /// otherwise appends it to the target's FIFO queue.
  std::optional<ScheduledCompletion> assign_task(const Task& task, ServerId target, SimTime now);

  /// Finishes an in-service task whose end time is `now` and pulls the head
  /// of the wait queue into the freed slot.
  CompletionOutcome complete_task(ServerId server_id, TaskId task_id, SimTime now);

  ClusterSnapshot snapshot(SimTime now) const;

  std::size_t size() const { return servers_.size(); }
  const ServerState& server(ServerId id) const { return servers_.at(id); }
  const std::vector<ServerState>& servers() const { return servers_; }
  SimTime accounting_horizon() const { return horizon_; }

  /// Tasks currently in service or queued, across all servers.
  std::size_t tasks_in_system() const;

 private:
  ScheduledCompletion start_service(ServerState& server, const Task& task, SimTime now);

  std::vector<ServerState> servers_;
  SimTime horizon_;
};

}  // namespace rlbalance
