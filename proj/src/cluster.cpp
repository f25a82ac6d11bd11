#include "rlbalance/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rlbalance {

void validate_cluster(const std::vector<ServerSpec>& specs) {
  if (specs.empty()) throw ValidationError("cluster has no servers");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const std::string where = "server " + std::to_string(i) + ": ";
    if (s.server_id != i) throw ValidationError(where + "server_id must equal its index");
    if (!(s.speed > 0.0) || !std::isfinite(s.speed)) throw ValidationError(where + "speed must be > 0");
    if (s.slots < 1) throw ValidationError(where + "slots must be >= 1");
    if (!(s.weight > 0.0) || !std::isfinite(s.weight)) throw ValidationError(where + "weight must be > 0");
  }
}

void ServerState::accrue(SimTime now, SimTime accounting_horizon) {
  busy_work_time = busy_time_at(now, accounting_horizon);
  last_accrual = now;
}

double ServerState::busy_time_at(SimTime t, SimTime accounting_horizon) const {
  const double from = std::min(last_accrual, accounting_horizon);
  const double to = std::min(t, accounting_horizon);
  if (to <= from) return busy_work_time;
  return busy_work_time + static_cast<double>(in_service.size()) * (to - from);
}

Cluster::Cluster(const std::vector<ServerSpec>& specs, SimTime accounting_horizon)
    : horizon_(accounting_horizon) {
  validate_cluster(specs);
  servers_.reserve(specs.size());
  for (const auto& spec : specs) {
    ServerState state;
    state.spec = spec;
    servers_.push_back(std::move(state));
  }
}

ScheduledCompletion Cluster::start_service(ServerState& server, const Task& task, SimTime now) {
  server.accrue(now, horizon_);
  const SimTime end = now + task.size / server.spec.speed;
  server.in_service.push_back(InService{task, now, end});
  return ScheduledCompletion{end, server.spec.server_id, task.id};
}

std::optional<ScheduledCompletion> Cluster::assign_task(const Task& task, ServerId target,
                                                        SimTime now) {
  if (target >= servers_.size()) {
    throw EngineError("dispatch to unknown server " + std::to_string(target) + " (cluster has " +
                      std::to_string(servers_.size()) + ")");
  }
  auto& server = servers_[target];
  if (server.has_free_slot()) return start_service(server, task, now);
  server.wait_queue.push_back(task);
  return std::nullopt;
}

CompletionOutcome Cluster::complete_task(ServerId server_id, TaskId task_id, SimTime now) {
  if (server_id >= servers_.size()) {
    throw EngineError("completion on unknown server " + std::to_string(server_id));
  }
  auto& server = servers_[server_id];
  auto it = std::find_if(server.in_service.begin(), server.in_service.end(),
                         [&](const InService& s) { return s.task.id == task_id; });
  if (it == server.in_service.end()) {
    throw EngineError("task " + std::to_string(task_id) + " is not in service on server " +
                      std::to_string(server_id));
  }
  if (it->end_time != now) {
    throw EngineError("task " + std::to_string(task_id) + " completes at " +
                      std::to_string(it->end_time) + ", not " + std::to_string(now));
  }

  server.accrue(now, horizon_);
  CompletionOutcome out;
  out.record = CompletedTaskRecord{
      .task_id = task_id,
      .server_id = server_id,
      .arrival_time = it->task.arrival_time,
      .start_time = it->start_time,
      .completion_time = now,
      .response_time = now - it->task.arrival_time,
      .deadline_window = it->task.deadline_window,
  };
  server.in_service.erase(it);

  if (!server.wait_queue.empty()) {
    Task next = server.wait_queue.front();
    server.wait_queue.pop_front();
    out.next = start_service(server, next, now);
  }
  return out;
}

ClusterSnapshot Cluster::snapshot(SimTime now) const {
  ClusterSnapshot snap;
  snap.now = now;
  const std::size_t n = servers_.size();
  snap.instant_utilization.resize(n);
  snap.in_service.resize(n);
  snap.queue_length.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = servers_[i];
    snap.in_service[i] = static_cast<int>(s.in_service.size());
    snap.queue_length[i] = static_cast<int>(s.wait_queue.size());
    snap.instant_utilization[i] =
        static_cast<double>(s.in_service.size()) / static_cast<double>(s.spec.slots);
    snap.active_tasks += snap.in_service[i] + snap.queue_length[i];
    total += snap.instant_utilization[i];
  }
  snap.system_load = n == 0 ? 0.0 : total / static_cast<double>(n);
  return snap;
}

std::size_t Cluster::tasks_in_system() const {
  std::size_t total = 0;
  for (const auto& s : servers_) total += s.in_service.size() + s.wait_queue.size();
  return total;
}

}  // namespace rlbalance
