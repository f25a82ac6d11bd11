#include "rlbalance/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "rlbalance/metrics.hpp"
#include "rlbalance/random.hpp"

namespace rlbalance {

namespace {

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

void validate_workload(const WorkloadSpec& spec) {
  if (!positive(spec.horizon)) throw ValidationError("workload.horizon must be > 0");
  std::visit(Overloaded{
                 [](const SteadyArrivals& a) {
                   if (!positive(a.rate)) throw ValidationError("workload.rate must be > 0");
                 },
                 [](const BurstyArrivals& a) {
                   if (!positive(a.rate_low)) throw ValidationError("workload.rate_low must be > 0");
                   if (!positive(a.rate_high)) throw ValidationError("workload.rate_high must be > 0");
                   if (a.rate_high < a.rate_low) {
                     throw ValidationError("workload.rate_high must not be below rate_low");
                   }
                   if (!positive(a.mean_dwell_low) || !positive(a.mean_dwell_high)) {
                     throw ValidationError("workload dwell means must be > 0");
                   }
                 },
             },
             spec.arrivals);
  std::visit(Overloaded{
                 [](const ExponentialSizes& s) {
                   if (!positive(s.mean)) throw ValidationError("size mean must be > 0");
                 },
                 [](const LogNormalSizes& s) {
                   if (!std::isfinite(s.mu)) throw ValidationError("size mu must be finite");
                   if (!positive(s.sigma)) throw ValidationError("size sigma must be > 0");
                 },
             },
             spec.sizes);
}

double mean_arrival_rate(const WorkloadSpec& spec) {
  return std::visit(Overloaded{
                        [](const SteadyArrivals& a) { return a.rate; },
                        [](const BurstyArrivals& a) {
                          return (a.rate_low * a.mean_dwell_low + a.rate_high * a.mean_dwell_high) /
                                 (a.mean_dwell_low + a.mean_dwell_high);
                        },
                    },
                    spec.arrivals);
}

double mean_task_size(const WorkloadSpec& spec) {
  return std::visit(Overloaded{
                        [](const ExponentialSizes& s) { return s.mean; },
                        [](const LogNormalSizes& s) { return std::exp(s.mu + 0.5 * s.sigma * s.sigma); },
                    },
                    spec.sizes);
}

WorkloadSpec scale_arrivals(WorkloadSpec spec, double factor) {
  if (!positive(factor)) throw ValidationError("load multiplier must be > 0");
  std::visit(Overloaded{
                 [&](SteadyArrivals& a) { a.rate *= factor; },
                 [&](BurstyArrivals& a) {
                   a.rate_low *= factor;
                   a.rate_high *= factor;
                 },
             },
             spec.arrivals);
  return spec;
}

std::uint64_t fingerprint(const WorkloadSpec& spec, std::uint64_t seed) {
  std::string text = "v1;";
  std::visit(Overloaded{
                 [&](const SteadyArrivals& a) { text += "steady:" + hex_double(a.rate); },
                 [&](const BurstyArrivals& a) {
                   text += "bursty:" + hex_double(a.rate_low) + ":" + hex_double(a.rate_high) + ":" +
                           hex_double(a.mean_dwell_low) + ":" + hex_double(a.mean_dwell_high);
                 },
             },
             spec.arrivals);
  std::visit(Overloaded{
                 [&](const ExponentialSizes& s) { text += ";exp:" + hex_double(s.mean); },
                 [&](const LogNormalSizes& s) {
                   text += ";lognormal:" + hex_double(s.mu) + ":" + hex_double(s.sigma);
                 },
             },
             spec.sizes);
  text += ";horizon:" + hex_double(spec.horizon) + ";seed:" + std::to_string(seed);

  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

TaskTrace generate_trace(const WorkloadSpec& spec, std::uint64_t seed) {
  validate_workload(spec);
  Rng arrivals(seed, Stream::Arrival);
  Rng sizes(seed, Stream::Size);
  Rng burst(seed, Stream::BurstState);

  auto draw_size = [&]() {
    return std::visit(Overloaded{
                          [&](const ExponentialSizes& s) { return sizes.exponential(s.mean); },
                          [&](const LogNormalSizes& s) {
                            return std::exp(s.mu + s.sigma * sizes.standard_normal());
                          },
                      },
                      spec.sizes);
  };

  TaskTrace trace;
  trace.spec_fingerprint = fingerprint(spec, seed);
  auto emit = [&](SimTime t) {
    const TaskId id = trace.tasks.size();
    trace.tasks.push_back(Task{.id = id, .arrival_time = t, .size = draw_size(), .deadline_window = std::nullopt});
  };

  if (const auto* steady = std::get_if<SteadyArrivals>(&spec.arrivals)) {
    const double mean_gap = 1.0 / steady->rate;
    SimTime t = arrivals.exponential(mean_gap);
    while (t <= spec.horizon) {
      emit(t);
      t += arrivals.exponential(mean_gap);
    }
    return trace;
  }

  // MMPP: the modulating chain starts in the low state. Within each dwell,
  // Poisson arrivals at that state's rate; by memorylessness the pending gap
  // is simply redrawn when the state flips.
  const auto& bursty = std::get<BurstyArrivals>(spec.arrivals);
  bool high = false;
  SimTime dwell_start = 0.0;
  while (dwell_start <= spec.horizon) {
    const double rate = high ? bursty.rate_high : bursty.rate_low;
    const double dwell = burst.exponential(high ? bursty.mean_dwell_high : bursty.mean_dwell_low);
    const SimTime dwell_end = std::min(dwell_start + dwell, spec.horizon);
    SimTime t = dwell_start + arrivals.exponential(1.0 / rate);
    while (t <= dwell_end) {
      emit(t);
      t += arrivals.exponential(1.0 / rate);
    }
    if (dwell_start + dwell >= spec.horizon) break;
    dwell_start += dwell;
    high = !high;
  }
  return trace;
}

TraceStats trace_stats(const std::vector<Task>& tasks) {
  if (tasks.empty()) throw ValidationError("trace_stats needs a non-empty trace");
  TraceStats s;
  s.count = tasks.size();
  if (tasks.size() > 1) {
    s.mean_interarrival = (tasks.back().arrival_time - tasks.front().arrival_time) /
                          static_cast<double>(tasks.size() - 1);
  }
  double size_sum = 0.0;
  for (const auto& t : tasks) size_sum += t.size;
  s.mean_size = size_sum / static_cast<double>(tasks.size());

  constexpr double kWindow = 100.0;
  std::size_t lo = 0;
  std::size_t best = 0;
  for (std::size_t hi = 0; hi < tasks.size(); ++hi) {
    while (tasks[hi].arrival_time - tasks[lo].arrival_time >= kWindow) ++lo;
    best = std::max(best, hi - lo + 1);
  }
  s.peak_rate_estimate = static_cast<double>(best) / kWindow;
  return s;
}

std::string trace_to_csv(const std::vector<Task>& tasks) {
  std::string out = "task_id,arrival_time,size\n";
  char buf[96];
  for (const auto& t : tasks) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g\n", static_cast<unsigned long long>(t.id),
                  t.arrival_time, t.size);
    out += buf;
  }
  return out;
}

std::vector<Task> trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "task_id,arrival_time,size") {
    throw ValidationError("trace CSV header must be 'task_id,arrival_time,size'");
  }
  std::vector<Task> tasks;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    unsigned long long id = 0;
    double arrival = 0.0;
    double size = 0.0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%llu,%lf,%lf%c", &id, &arrival, &size, &tail) != 3) {
      throw ValidationError("trace CSV line " + std::to_string(row) + ": malformed row '" + line + "'");
    }
    tasks.push_back(Task{.id = id, .arrival_time = arrival, .size = size, .deadline_window = std::nullopt});
  }
  return tasks;
}

void save_trace(const std::vector<Task>& tasks, const std::filesystem::path& path) {
  write_text_file(path, trace_to_csv(tasks));
}

std::vector<Task> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto tasks = trace_from_csv(buf.str());
  return tasks;
}

}  // namespace rlbalance
