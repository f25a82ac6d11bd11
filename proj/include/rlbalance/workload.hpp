#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "rlbalance/types.hpp"

namespace rlbalance {

struct SteadyArrivals {
  double rate = 1.0;  // tasks per second
};

/// Two-state Markov-modulated Poisson arrivals.
struct BurstyArrivals {
  double rate_low = 1.0;
  double rate_high = 2.0;
  double mean_dwell_low = 50.0;
  double mean_dwell_high = 10.0;
};

struct ExponentialSizes {
  double mean = 1.0;
};

struct LogNormalSizes {
  double mu = 0.0;
  double sigma = 1.0;
};

struct WorkloadSpec {
  std::variant<SteadyArrivals, BurstyArrivals> arrivals;
  std::variant<ExponentialSizes, LogNormalSizes> sizes;
  SimTime horizon = 1000.0;
};

void validate_workload(const WorkloadSpec& spec);

/// Long-run mean arrival rate (tasks/s).
double mean_arrival_rate(const WorkloadSpec& spec);
double mean_task_size(const WorkloadSpec& spec);
/// Multiplies every arrival rate by `factor` (> 0).
WorkloadSpec scale_arrivals(WorkloadSpec spec, double factor);

struct TaskTrace {
  std::vector<Task> tasks;
  std::uint64_t spec_fingerprint = 0;
};

/// Materializes a trace on [0, spec.horizon]. Arrivals, sizes and the burst
/// state each draw from their own stream of `seed`.
TaskTrace generate_trace(const WorkloadSpec& spec, std::uint64_t seed);

/// FNV-1a over a canonical text rendering of (spec, seed).
std::uint64_t fingerprint(const WorkloadSpec& spec, std::uint64_t seed);

struct TraceStats {
  std::size_t count = 0;
  double mean_interarrival = 0.0;
  double mean_size = 0.0;
  /// Max over 100 s sliding windows of arrivals / 100.
  double peak_rate_estimate = 0.0;
};

/// Throws ValidationError on an empty trace.
TraceStats trace_stats(const std::vector<Task>& tasks);

/// CSV `task_id,arrival_time,size` with 17 significant digits, so import
/// reproduces the trace exactly.
std::string trace_to_csv(const std::vector<Task>& tasks);
std::vector<Task> trace_from_csv(const std::string& text);
void save_trace(const std::vector<Task>& tasks, const std::filesystem::path& path);
std::vector<Task> load_trace(const std::filesystem::path& path);

}  // namespace rlbalance
