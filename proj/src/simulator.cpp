#include "rlbalance/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlbalance/cluster.hpp"
#include "rlbalance/event_queue.hpp"

namespace rlbalance {

void validate_trace(std::span<const Task> trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Task& t = trace[i];
    const std::string where = "trace row " + std::to_string(i) + ": ";
    if (!std::isfinite(t.arrival_time) || t.arrival_time < 0.0) {
      throw ValidationError(where + "arrival_time must be finite and non-negative");
    }
    if (!(t.size > 0.0) || !std::isfinite(t.size)) throw ValidationError(where + "size must be > 0");
    if (t.deadline_window && !(*t.deadline_window > 0.0)) {
      throw ValidationError(where + "deadline_window must be > 0");
    }
    if (i > 0) {
      if (t.arrival_time < trace[i - 1].arrival_time) {
        throw ValidationError(where + "trace is not sorted by arrival_time");
      }
      if (t.id <= trace[i - 1].id) throw ValidationError(where + "task ids must strictly increase");
    }
  }
}

namespace {

void check_invariants(const Cluster& cluster, std::size_t admitted, std::size_t completed) {
  for (const auto& s : cluster.servers()) {
    if (static_cast<int>(s.in_service.size()) > s.spec.slots) {
      throw EngineError("server " + std::to_string(s.spec.server_id) + " exceeds its slots");
    }
    if (!s.wait_queue.empty() && s.has_free_slot()) {
      throw EngineError("server " + std::to_string(s.spec.server_id) +
                        " idles a slot while its queue is non-empty");
    }
  }
  if (completed + cluster.tasks_in_system() != admitted) {
    throw EngineError("task conservation violated");
  }
}

}  // namespace

RunResult run(const std::vector<ServerSpec>& cluster_config, std::span<const Task> trace,
              Policy& policy, SimTime horizon, std::uint64_t seed, const RunOptions& options) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon must be positive and finite");
  }
  validate_trace(trace);

  Cluster cluster(cluster_config, horizon);
  const std::size_t n = cluster.size();
  EventQueue events;
  Collector collector;
  Rng exploration(seed, Stream::Exploration);

  RunResult result;
  result.policy_name = policy.name();
  result.seed = seed;
  result.horizon = horizon;

  SimTime next_sample = options.sample_interval > 0.0 ? options.sample_interval : horizon + 1.0;
  std::uint64_t sample_index = 1;
  auto flush_samples_before = [&](SimTime t) {
    while (next_sample <= horizon && next_sample < t) {
      collector.sample_utilization(cluster, next_sample);
      ++sample_index;
      next_sample = static_cast<double>(sample_index) * options.sample_interval;
    }
  };

  auto schedule = [&](const ScheduledCompletion& c) {
    events.push(c.time, CompletionEvent{c.server_id, c.task_id});
  };

  events.push(horizon, EndOfHorizonEvent{});
  if (!trace.empty() && trace.front().arrival_time <= horizon) {
    events.push(trace.front().arrival_time, ArrivalEvent{0});
  }

  std::size_t admitted = 0;
  while (auto event = events.pop_next()) {
    const SimTime now = event->time;
    flush_samples_before(now);

    if (const auto* arrival = std::get_if<ArrivalEvent>(&event->kind)) {
      const Task& task = trace[arrival->trace_index];
      ++admitted;
      const ClusterSnapshot snap = cluster.snapshot(now);
      const ServerId target = policy.choose(snap, task, exploration);
      if (target >= n) {
        throw EngineError(policy.name() + " chose server " + std::to_string(target) +
                          " outside [0, " + std::to_string(n) + ")");
      }
      if (auto completion = cluster.assign_task(task, target, now)) schedule(*completion);
      const std::size_t next = arrival->trace_index + 1;
      if (next < trace.size() && trace[next].arrival_time <= horizon) {
        events.push(trace[next].arrival_time, ArrivalEvent{next});
      }
    } else if (const auto* done = std::get_if<CompletionEvent>(&event->kind)) {
      CompletionOutcome outcome = cluster.complete_task(done->server_id, done->task_id, now);
      collector.record_completion(outcome.record);
      if (outcome.next) schedule(*outcome.next);
      policy.on_completion(outcome.record, cluster.snapshot(now));
    }
    // EndOfHorizon needs no action: arrivals beyond it were never scheduled
    // and busy-time accounting is clipped by the cluster itself.

    if (options.check_invariants) check_invariants(cluster, admitted, collector.count());
  }
  flush_samples_before(std::numeric_limits<double>::infinity());

  result.tasks_arrived = admitted;
  result.final_time_avg_utilization.reserve(n);
  for (const auto& s : cluster.servers()) {
    const double busy = s.busy_time_at(std::max(s.last_accrual, horizon), horizon);
    result.final_time_avg_utilization.push_back(busy / (horizon * s.spec.slots));
  }
  result.records = collector.take_records();
  result.utilization = collector.take_samples();
  return result;
}

}  // namespace rlbalance
