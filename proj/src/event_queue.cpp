#include "rlbalance/event_queue.hpp"

#include <cmath>
#include <string>

namespace rlbalance {

void EventQueue::push(SimTime time, EventKind kind) {
  if (!std::isfinite(time)) throw EngineError("event time is not finite");
  if (time < now_) {
    throw EngineError("event scheduled in the past: t=" + std::to_string(time) +
                      " < now=" + std::to_string(now_));
  }
  heap_.push(Event{time, next_seq_++, std::move(kind)});
}

std::optional<Event> EventQueue::pop_next() {
  if (heap_.empty()) return std::nullopt;
  Event e = heap_.top();
  heap_.pop();
  now_ = e.time;
  return e;
}

}  // namespace rlbalance
