#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "rlbalance/types.hpp"

namespace rlbalance {

struct ArrivalEvent {
  std::size_t trace_index = 0;
  bool operator==(const ArrivalEvent&) const = default;
};

struct CompletionEvent {
  ServerId server_id = 0;
  TaskId task_id = 0;
  bool operator==(const CompletionEvent&) const = default;
};

struct EndOfHorizonEvent {
  bool operator==(const EndOfHorizonEvent&) const = default;
};

using EventKind = std::variant<ArrivalEvent, CompletionEvent, EndOfHorizonEvent>;

struct Event {
  SimTime time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind;
};

/// Min-priority queue over (time, seq). push() stamps the sequence number,
/// so equal-time events pop in insertion order.
class EventQueue {
 public:
  /// Throws EngineError if time precedes the last popped event's time or
  /// is not finite.
  void push(SimTime time, EventKind kind);
  std::optional<Event> pop_next();

  SimTime now() const { return now_; }
  std::size_t size() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0.0;
};

}  // namespace rlbalance
