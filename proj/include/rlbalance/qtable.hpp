#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rlbalance/types.hpp"

namespace rlbalance {

/// Discretized observation of the cluster.
struct DiscreteState {
  std::vector<std::uint16_t> util_bins;  // one per server, each in [0, B)
  std::uint16_t active_tasks_bin = 0;    // [0, B_a)
  std::uint16_t load_bin = 0;            // [0, B)
  std::vector<std::uint16_t> queue_bins;  // one per server when queue-aware, else empty

  bool operator==(const DiscreteState&) const = default;
  auto operator<=>(const DiscreteState&) const = default;
};

struct DiscreteStateHash {
  std::size_t operator()(const DiscreteState& s) const noexcept;
};

/// Sparse action-value table. Absent (state, action) pairs read as 0.0 with
/// zero visits; only visited pairs are stored.
class QTable {
 public:
  explicit QTable(std::size_t num_actions = 0) : num_actions_(num_actions) {}

  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_states() const { return rows_.size(); }
  /// Number of (state, action) pairs with at least one visit.
  std::size_t num_entries() const;
  bool empty() const { return rows_.empty(); }

  double value(const DiscreteState& s, std::size_t action) const;
  std::uint64_t visits(const DiscreteState& s, std::size_t action) const;
  /// max_a Q(s, a); 0.0 for an unseen state.
  double max_value(const DiscreteState& s) const;
  /// argmax_a Q(s, a), lowest index on ties.
  std::size_t best_action(const DiscreteState& s) const;
  /// argmax over visited actions only (lowest index on ties); falls back to
  /// best_action() when no action of `s` has been visited.
  std::size_t best_visited_action(const DiscreteState& s) const;

  /// Stores `q` and bumps the visit count. Throws on a non-finite value.
  void store(const DiscreteState& s, std::size_t action, double q);
  /// Raw write used by deserialization.
  void set_entry(const DiscreteState& s, std::size_t action, double q, std::uint64_t visits);

  struct Entry {
    DiscreteState state;
    std::size_t action = 0;
    double q_value = 0.0;
    std::uint64_t visit_count = 0;
  };
  /// Visited entries in ascending (state, action) order.
  std::vector<Entry> entries() const;

  bool operator==(const QTable& other) const;

 private:
  struct Row {
    std::vector<double> q;
    std::vector<std::uint64_t> visits;
  };
  Row& row(const DiscreteState& s);

  std::size_t num_actions_;
  std::unordered_map<DiscreteState, Row, DiscreteStateHash> rows_;
};

/// Text persistence, format version 1:
///
///   rl-balance-qtable 1
///   num_actions <N>
///   state,action,q_value,visit_count
///   <u0>:...:<uN-1>|<active_bin>|<load_bin>[|<q0>:...:<qN-1>],<action>,<q %.17g>,<visits>
///   ...
///
/// The bracketed queue-bin group is present only for queue-aware states.
/// Rows are in ascending (state, action) order; q_value uses 17 significant
/// digits so load() reproduces every double exactly.
std::string serialize_qtable(const QTable& table);
QTable deserialize_qtable(const std::string& text);
void save_qtable(const QTable& table, const std::filesystem::path& path);
QTable load_qtable(const std::filesystem::path& path);

}  // namespace rlbalance
