#include "rlbalance/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace rlbalance {

void Collector::record_completion(const CompletedTaskRecord& record) {
  if (!seen_.insert(record.task_id).second) {
    throw ValidationError("duplicate completion record for task " + std::to_string(record.task_id));
  }
  records_.push_back(record);
}

void Collector::sample_utilization(const Cluster& cluster, SimTime now) {
  const SimTime window = std::min(now, cluster.accounting_horizon());
  for (const auto& server : cluster.servers()) {
    const double capacity = window * static_cast<double>(server.spec.slots);
    const double busy = server.busy_time_at(now, cluster.accounting_horizon());
    samples_.push_back(UtilizationSample{
        .time = now,
        .server_id = server.spec.server_id,
        .time_avg_utilization = capacity > 0.0 ? std::clamp(busy / capacity, 0.0, 1.0) : 0.0,
        .instant_utilization =
            static_cast<double>(server.in_service.size()) / static_cast<double>(server.spec.slots),
        .queue_length = static_cast<int>(server.wait_queue.size()),
    });
  }
}

double nearest_rank(const std::vector<double>& sorted, int pct) {
  if (sorted.empty()) return 0.0;
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(pct) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

RunSummary summarize(const RunResult& result, SimTime horizon) {
  RunSummary s;
  s.policy_name = result.policy_name;
  s.seed = result.seed;
  s.tasks_arrived = result.tasks_arrived;

  std::vector<double> rts;
  rts.reserve(result.records.size());
  double sum = 0.0;
  for (const auto& r : result.records) {
    rts.push_back(r.response_time);
    sum += r.response_time;
    const bool in_window = r.completion_time <= horizon &&
                           (!r.deadline_window || r.response_time <= *r.deadline_window);
    if (in_window) ++s.tasks_completed_in_window;
  }
  if (s.tasks_arrived == 0) {
    s.no_arrivals = true;
    s.completion_rate = 1.0;
  } else {
    s.completion_rate =
        static_cast<double>(s.tasks_completed_in_window) / static_cast<double>(s.tasks_arrived);
  }
  if (!rts.empty()) {
    s.mean_rt = sum / static_cast<double>(rts.size());
    std::sort(rts.begin(), rts.end());
    s.p50_rt = nearest_rank(rts, 50);
    s.p95_rt = nearest_rank(rts, 95);
    s.p99_rt = nearest_rank(rts, 99);
  }

  const auto& u = result.final_time_avg_utilization;
  if (!u.empty()) {
    const double n = static_cast<double>(u.size());
    s.mean_util = std::accumulate(u.begin(), u.end(), 0.0) / n;
    double var = 0.0;
    for (double x : u) var += (x - s.mean_util) * (x - s.mean_util);
    s.std_util_across_servers = std::sqrt(var / n);
  }
  return s;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

namespace {

double rounded(double value) { return std::strtod(format_number(value).c_str(), nullptr); }

}  // namespace

std::string tasks_csv(const RunResult& result) {
  std::string out = "task_id,server_id,arrival_time,start_time,completion_time,response_time\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.task_id);
    out += ',';
    out += std::to_string(r.server_id);
    for (double v : {r.arrival_time, r.start_time, r.completion_time, r.response_time}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::string util_csv(const RunResult& result) {
  std::string out = "time,server_id,instant_utilization,time_avg_utilization,queue_length\n";
  for (const auto& s : result.utilization) {
    out += format_number(s.time);
    out += ',';
    out += std::to_string(s.server_id);
    out += ',';
    out += format_number(s.instant_utilization);
    out += ',';
    out += format_number(s.time_avg_utilization);
    out += ',';
    out += std::to_string(s.queue_length);
    out += '\n';
  }
  return out;
}

std::string summary_json(const std::vector<RunSummary>& summaries) {
  // Values pass through the 9-digit formatter first, so the shortest
  // round-trip representation json emits has at most nine digits.
  auto runs = nlohmann::ordered_json::array();
  for (const auto& s : summaries) {
    nlohmann::ordered_json j;
    j["policy_name"] = s.policy_name;
    j["seed"] = s.seed;
    j["tasks_arrived"] = s.tasks_arrived;
    j["tasks_completed_in_window"] = s.tasks_completed_in_window;
    j["completion_rate"] = rounded(s.completion_rate);
    j["mean_rt"] = rounded(s.mean_rt);
    j["p50_rt"] = rounded(s.p50_rt);
    j["p95_rt"] = rounded(s.p95_rt);
    j["p99_rt"] = rounded(s.p99_rt);
    j["mean_util"] = rounded(s.mean_util);
    j["std_util_across_servers"] = rounded(s.std_util_across_servers);
    runs.push_back(std::move(j));
  }
  return runs.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void export_results(const std::vector<ExportItem>& items, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<RunSummary> summaries;
  for (const auto& item : items) {
    summaries.push_back(item.summary);
    if (item.result == nullptr) continue;
    const std::string stem = item.summary.policy_name + "_" + std::to_string(item.summary.seed);
    write_text_file(out_dir / ("tasks_" + stem + ".csv"), tasks_csv(*item.result));
    write_text_file(out_dir / ("util_" + stem + ".csv"), util_csv(*item.result));
  }
  write_text_file(out_dir / "summary.json", summary_json(summaries));
}

}  // namespace rlbalance
