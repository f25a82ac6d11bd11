#include "rlbalance/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <thread>

#include "rlbalance/policies.hpp"
#include "rlbalance/simulator.hpp"
#include "rlbalance/workload.hpp"

namespace rlbalance {

TaskTrace evaluation_trace(const ExperimentConfig& config, std::uint64_t seed) {
  return generate_trace(config.workload, seed);
}

std::vector<Task> training_trace(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.training_tasks == 0) return {};
  WorkloadSpec spec = config.workload;
  const double expected = static_cast<double>(config.training_tasks) / mean_arrival_rate(spec);
  // Generous horizon so the count is reached with overwhelming probability;
  // doubled on the rare shortfall.
  spec.horizon = 1.5 * expected + 1000.0;
  const std::uint64_t training_seed =
      derive_seed(seed, static_cast<std::uint64_t>(Stream::TrainingWorkload));
  while (true) {
    auto tasks = generate_trace(spec, training_seed).tasks;
    if (tasks.size() >= config.training_tasks) {
      tasks.resize(config.training_tasks);
      return tasks;
    }
    spec.horizon *= 2.0;
  }
}

std::unique_ptr<Policy> make_baseline(const std::string& name, const std::vector<ServerSpec>& cluster) {
  if (name == kRoundRobin) return std::make_unique<RoundRobinPolicy>();
  if (name == kLeastConnections) return std::make_unique<LeastConnectionsPolicy>();
  if (name == kWeighted) {
    std::vector<double> weights;
    for (const auto& s : cluster) weights.push_back(s.weight);
    return std::make_unique<SmoothWeightedPolicy>(std::move(weights));
  }
  std::string valid;
  for (const auto& n : policy_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownPolicyError("unknown policy '" + name + "' (valid: " + valid + ")");
}

Cell evaluate_cell(const ExperimentConfig& config, const std::string& policy, std::uint64_t seed,
                   const std::vector<Task>& trace, const QTable* pretrained) {
  RunOptions options;
  options.sample_interval = config.sample_interval;
  const SimTime horizon = config.evaluation_horizon();

  Cell cell;
  if (policy == kRl) {
    std::shared_ptr<QTable> table;
    if (pretrained != nullptr) {
      table = std::make_shared<QTable>(*pretrained);
    } else {
      TrainResult trained = train(config.cluster, training_trace(config, seed), config.agent, seed);
      table = std::make_shared<QTable>(std::move(trained.q));
      cell.learning_curve = std::move(trained.learning_curve);
    }
    if (table->num_actions() != config.cluster.size()) {
      throw ValidationError("Q-table has " + std::to_string(table->num_actions()) +
                            " actions but the cluster has " + std::to_string(config.cluster.size()) +
                            " servers");
    }
    QLearningPolicy agent(table, config.agent,
                          config.agent.learn_during_evaluation ? QLearningPolicy::Mode::Online
                                                               : QLearningPolicy::Mode::Greedy);
    cell.result = run(config.cluster, trace, agent, horizon, seed, options);
    cell.table = table;
  } else {
    auto baseline = make_baseline(policy, config.cluster);
    cell.result = run(config.cluster, trace, *baseline, horizon, seed, options);
  }
  cell.summary = summarize(cell.result, horizon);
  return cell;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("RL_BALANCE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void run_parallel(std::size_t n, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(worker_threads(), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string learning_curve_csv(const std::vector<LearningPoint>& curve) {
  std::string out = "tasks_seen,mean_reward_window\n";
  for (const auto& p : curve) out += std::to_string(p.tasks_seen) + "," + format_number(p.mean_reward_window) + "\n";
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string ranked_table(const std::vector<RunSummary>& summaries) {
  struct Row {
    std::string policy;
    double mean_rt, p95_rt, completion_rate, std_util;
  };
  std::map<std::string, std::vector<const RunSummary*>> by_policy;
  std::vector<std::string> order;
  for (const auto& s : summaries) {
    if (!by_policy.count(s.policy_name)) order.push_back(s.policy_name);
    by_policy[s.policy_name].push_back(&s);
  }
  std::vector<Row> rows;
  for (const auto& name : order) {
    auto pick = [&](auto field) {
      std::vector<double> v;
      for (const auto* s : by_policy[name]) v.push_back(field(*s));
      return median(std::move(v));
    };
    rows.push_back(Row{name, pick([](const RunSummary& s) { return s.mean_rt; }),
                       pick([](const RunSummary& s) { return s.p95_rt; }),
                       pick([](const RunSummary& s) { return s.completion_rate; }),
                       pick([](const RunSummary& s) { return s.std_util_across_servers; })});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.mean_rt < b.mean_rt; });

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %-18s %12s %12s %16s %10s\n", "rank", "policy", "mean_rt",
                "p95_rt", "completion_rate", "std_util");
  out += buf;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(buf, sizeof buf, "%-4zu %-18s %12.4f %12.4f %16.4f %10.4f\n", i + 1, r.policy.c_str(),
                  r.mean_rt, r.p95_rt, r.completion_rate, r.std_util);
    out += buf;
  }
  return out;
}

namespace {

void require_known(const std::string& policy) {
  if (!is_known_policy(policy)) make_baseline(policy, {});  // throws with the valid list
}

}  // namespace

CommandReport cmd_run(const ExperimentConfig& config, const std::string& policy, std::uint64_t seed,
                      const std::filesystem::path& out_dir,
                      const std::optional<std::filesystem::path>& qtable_path) {
  require_known(policy);
  CommandReport report;
  std::optional<QTable> pretrained;
  if (qtable_path) {
    if (policy != kRl) report.warnings.push_back("--qtable ignored for policy " + policy);
    else pretrained = load_qtable(*qtable_path);
  }
  const TaskTrace trace = evaluation_trace(config, seed);
  Cell cell = evaluate_cell(config, policy, seed, trace.tasks, pretrained ? &*pretrained : nullptr);
  if (cell.summary.no_arrivals) report.warnings.push_back("no task arrived before the horizon");

  export_results({ExportItem{cell.summary, &cell.result}}, out_dir);
  if (policy == kRl && !pretrained) {
    write_text_file(out_dir / "learning_curve.csv", learning_curve_csv(cell.learning_curve));
    save_qtable(*cell.table, out_dir / "qtable.txt");
  }
  report.table = ranked_table({cell.summary});
  return report;
}

CompareResult cmd_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  for (const auto& p : config.policies) require_known(p);
  CompareResult out;
  const std::size_t num_policies = config.policies.size();
  const std::size_t num_cells = config.seeds.size() * num_policies;

  // Traces are materialized before any policy runs, one per seed.
  std::vector<TaskTrace> traces(config.seeds.size());
  run_parallel(traces.size(), [&](std::size_t i) { traces[i] = evaluation_trace(config, config.seeds[i]); });

  out.cells.resize(num_cells);
  run_parallel(num_cells, [&](std::size_t i) {
    const std::size_t seed_index = i / num_policies;
    out.cells[i] = evaluate_cell(config, config.policies[i % num_policies], config.seeds[seed_index],
                                 traces[seed_index].tasks);
  });

  std::vector<RunSummary> summaries;
  std::vector<ExportItem> items;
  for (const auto& cell : out.cells) {
    summaries.push_back(cell.summary);
    items.push_back(ExportItem{cell.summary, &cell.result});
    if (cell.summary.no_arrivals) {
      out.report.warnings.push_back("no task arrived before the horizon for seed " +
                                    std::to_string(cell.summary.seed));
    }
  }
  if (!out_dir.empty()) {
    export_results(items, out_dir);
    for (const auto& cell : out.cells) {
      if (cell.summary.policy_name != kRl) continue;
      write_text_file(out_dir / ("learning_curve_" + std::to_string(cell.summary.seed) + ".csv"),
                      learning_curve_csv(cell.learning_curve));
    }
  }
  out.report.table = ranked_table(summaries);
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "load_multiplier,policy,seed,mean_rt,p95_rt,completion_rate,std_util\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out += format_number(r.load_multiplier) + "," + s.policy_name + "," + std::to_string(s.seed) + "," +
           format_number(s.mean_rt) + "," + format_number(s.p95_rt) + "," +
           format_number(s.completion_rate) + "," + format_number(s.std_util_across_servers) + "\n";
  }
  return out;
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config, const std::vector<double>& multipliers,
                                const std::filesystem::path& out_dir, CommandReport* report) {
  if (multipliers.empty()) throw ValidationError("load_multipliers: at least one multiplier is required");
  for (double m : multipliers) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ValidationError("load_multipliers: " + format_number(m) + " is not positive");
    }
  }
  std::vector<SweepRow> rows;
  std::string tables;
  for (double m : multipliers) {
    ExperimentConfig scaled = config;
    scaled.workload = scale_arrivals(config.workload, m);
    CompareResult compared = cmd_compare(scaled, {});
    for (const auto& cell : compared.cells) rows.push_back(SweepRow{m, cell.summary});
    tables += "load_multiplier " + format_number(m) + "\n" + compared.report.table;
    if (report) {
      report->warnings.insert(report->warnings.end(), compared.report.warnings.begin(),
                              compared.report.warnings.end());
    }
  }
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    write_text_file(out_dir / "sweep.csv", sweep_csv(rows));
  }
  if (report) report->table = tables;
  return rows;
}

CommandReport cmd_train(const ExperimentConfig& config, std::uint64_t seed,
                        const std::filesystem::path& out_dir, TrainResult* trained) {
  CommandReport report;
  if (config.training_tasks == 0) report.warnings.push_back("training_tasks is 0; persisting an empty table");
  TrainResult result = train(config.cluster, training_trace(config, seed), config.agent, seed);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  save_qtable(result.q, out_dir / "qtable.txt");
  write_text_file(out_dir / "learning_curve.csv", learning_curve_csv(result.learning_curve));

  char buf[160];
  std::snprintf(buf, sizeof buf, "trained on %llu tasks: %zu states, %zu entries\n",
                static_cast<unsigned long long>(config.training_tasks), result.q.num_states(),
                result.q.num_entries());
  report.table = buf;
  if (!result.learning_curve.empty()) {
    std::snprintf(buf, sizeof buf, "mean reward: first window %.4f, last window %.4f\n",
                  result.learning_curve.front().mean_reward_window,
                  result.learning_curve.back().mean_reward_window);
    report.table += buf;
  }
  if (trained) *trained = std::move(result);
  return report;
}

}  // namespace rlbalance
