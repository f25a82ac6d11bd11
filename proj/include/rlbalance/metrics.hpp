#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include "rlbalance/cluster.hpp"
#include "rlbalance/types.hpp"

namespace rlbalance {

struct UtilizationSample {
  SimTime time = 0.0;
  ServerId server_id = 0;
  double time_avg_utilization = 0.0;
  double instant_utilization = 0.0;
  int queue_length = 0;

  bool operator==(const UtilizationSample&) const = default;
};

/// Per-run accumulator of task records and utilization samples.
class Collector {
 public:
  /// Throws ValidationError on a task id that was already recorded.
  void record_completion(const CompletedTaskRecord& record);
  /// Appends one sample per server. Time-averaged utilization is taken over
  /// [0, min(now, accounting horizon)].
  void sample_utilization(const Cluster& cluster, SimTime now);

  std::size_t count() const { return records_.size(); }
  const std::vector<CompletedTaskRecord>& records() const { return records_; }
  const std::vector<UtilizationSample>& samples() const { return samples_; }

  std::vector<CompletedTaskRecord> take_records() { return std::move(records_); }
  std::vector<UtilizationSample> take_samples() { return std::move(samples_); }

 private:
  std::vector<CompletedTaskRecord> records_;
  std::unordered_set<TaskId> seen_;
  std::vector<UtilizationSample> samples_;
};

/// Everything one simulation produces.
struct RunResult {
  std::string policy_name;
  std::uint64_t seed = 0;
  SimTime horizon = 0.0;
  std::uint64_t tasks_arrived = 0;
  std::vector<CompletedTaskRecord> records;
  std::vector<UtilizationSample> utilization;
  /// Busy slot-seconds within [0, horizon] / (horizon * slots), per server.
  std::vector<double> final_time_avg_utilization;
};

struct RunSummary {
  std::string policy_name;
  std::uint64_t seed = 0;
  std::uint64_t tasks_arrived = 0;
  std::uint64_t tasks_completed_in_window = 0;
  double completion_rate = 0.0;
  double mean_rt = 0.0;
  double p50_rt = 0.0;
  double p95_rt = 0.0;
  double p99_rt = 0.0;
  double mean_util = 0.0;
  double std_util_across_servers = 0.0;
  /// Set when nothing arrived; completion_rate is then reported as 1.0.
  bool no_arrivals = false;
};

/// Nearest-rank percentile: the ceil(pct/100 * n)-th order statistic of an
/// ascending-sorted sample. Returns 0 for an empty sample.
double nearest_rank(const std::vector<double>& sorted, int pct);

RunSummary summarize(const RunResult& result, SimTime horizon);

/// "%.9g": nine significant digits, ties to even.
std::string format_number(double value);

/// A finished run for export: its summary plus the raw per-task/utilization data.
struct ExportItem {
  RunSummary summary;
  const RunResult* result = nullptr;  // may be null: summary only
};

std::string tasks_csv(const RunResult& result);
std::string util_csv(const RunResult& result);
std::string summary_json(const std::vector<RunSummary>& summaries);

/// Writes tasks_<policy>_<seed>.csv and util_<policy>_<seed>.csv for each item
/// with a result, plus summary.json. Throws std::runtime_error naming the path
/// on I/O failure.
void export_results(const std::vector<ExportItem>& items, const std::filesystem::path& out_dir);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace rlbalance
