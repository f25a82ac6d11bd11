#pragma once

#include <string>

#include "rlbalance/random.hpp"
#include "rlbalance/types.hpp"

namespace rlbalance {

/// A dispatch policy. One instance belongs to exactly one run.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  /// Must return a server id in [0, snapshot.num_servers()).
  virtual ServerId choose(const ClusterSnapshot& snapshot, const Task& task, Rng& rng) = 0;
  /// Called after each completion with the post-completion snapshot.
  virtual void on_completion(const CompletedTaskRecord& /*record*/,
                             const ClusterSnapshot& /*snapshot*/) {}
};

}  // namespace rlbalance
