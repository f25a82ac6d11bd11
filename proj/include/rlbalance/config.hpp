#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rlbalance/agent.hpp"
#include "rlbalance/types.hpp"
#include "rlbalance/workload.hpp"

namespace rlbalance {

inline constexpr int kConfigVersion = 1;

/// A complete experiment description. See configs/*.cfg for the schema.
struct ExperimentConfig {
  std::vector<ServerSpec> cluster;
  WorkloadSpec workload;  // workload.horizon is the evaluation horizon
  std::vector<std::string> policies;
  AgentConfig agent;  // fully resolved: defaults for t_ref / decay filled in
  std::uint64_t training_tasks = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> load_multipliers;
  double sample_interval = 1.0;
  std::filesystem::path out_dir = "out";

  SimTime evaluation_horizon() const { return workload.horizon; }
};

/// Parses and validates a config document. Unknown keys, wrong types and
/// out-of-range values raise ValidationError listing every offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

void validate_config(const ExperimentConfig& config);

}  // namespace rlbalance
