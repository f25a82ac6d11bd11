// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "rlbalance/config.hpp"
#include "rlbalance/experiment.hpp"
#include "rlbalance/mdp.hpp"
#include "rlbalance/policies.hpp"
#include "rlbalance/simulator.hpp"
#include "rlbalance/workload.hpp"
#include "toy_mdp.hpp"

using namespace rlbalance;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

std::vector<Task> first_n(const WorkloadSpec& spec, std::uint64_t seed, std::size_t n) {
  auto tasks = generate_trace(spec, seed).tasks;
  if (tasks.size() > n) tasks.resize(n);
  return tasks;
}

double mean_response(const RunResult& r) {
  double sum = 0.0;
  for (const auto& rec : r.records) sum += rec.response_time;
  return sum / static_cast<double>(r.records.size());
}

struct Mm1 {
  RunResult result;
  double horizon = 0.0;
  double seconds = 0.0;
};

Mm1 run_mm1(double lambda, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 200000;
  WorkloadSpec spec{SteadyArrivals{lambda}, ExponentialSizes{1.0}, 1.2 * n / lambda};
  const auto tasks = first_n(spec, seed, n);
  const double horizon = tasks.back().arrival_time;
  RoundRobinPolicy policy;
  Mm1 out;
  out.result = run({ServerSpec{0, 1.0, 1, 1.0}}, tasks, policy, horizon, seed);
  out.horizon = horizon;
  out.seconds = seconds_since(t0);
  return out;
}

void check_mm1(const Mm1& run, double expected, double tolerance, const std::string& name) {
  const double w = mean_response(run.result);
  const double rel = std::abs(w - expected) / expected;
  report(name, run.result.records.size() == 200000 && rel < tolerance && run.seconds < 10.0,
         fmt("mean response %.4f vs %.1f (rel err %.4f, tol %.2f), %zu tasks, %.2fs", w, expected, rel,
             tolerance, run.result.records.size(), run.seconds));
}

void check_littles_law(const Mm1& run) {
  // L from the sampled series: tasks in service (instant utilization * slots)
  // plus queued tasks, averaged over the sample instants.
  double occupancy = 0.0;
  std::size_t samples = 0;
  for (const auto& s : run.result.utilization) {
    occupancy += s.instant_utilization + s.queue_length;
    ++samples;
  }
  const double L = occupancy / static_cast<double>(samples);
  std::size_t arrived = 0;
  double w_sum = 0.0;
  for (const auto& r : run.result.records) {
    if (r.arrival_time <= run.horizon) {
      ++arrived;
      w_sum += r.response_time;
    }
  }
  const double lambda = static_cast<double>(arrived) / run.horizon;
  const double W = w_sum / static_cast<double>(arrived);
  const double rel = std::abs(L - lambda * W) / L;
  report("littles_law", rel < 0.02,
         fmt("L=%.4f lambda*W=%.4f (rel %.4f, tol 0.02) over %zu samples", L, lambda * W, rel, samples));
}

void check_q_learning() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mdp = testing::toy_ring_mdp();
  const auto q_star = value_iteration(mdp, 0.9, 1e-12);
  const std::uint64_t updates = 100000;
  const auto learned = learn_mdp(mdp, updates, 0.1, 0.9, 0.1, 2024);
  const double gap = max_norm_distance(to_matrix(learned, mdp.num_states), q_star);
  const double secs = seconds_since(t0);
  report("q_learning_vs_value_iteration", gap < 0.01 && secs < 5.0,
         fmt("max-norm gap %.6f after %llu updates (tol 0.01), %.2fs", gap,
             static_cast<unsigned long long>(updates), secs));
}

/// Forwards to least-connections and checks every pick against the snapshot.
class CheckedLeastConnections final : public Policy {
 public:
  std::string name() const override { return "least_connections"; }
  ServerId choose(const ClusterSnapshot& s, const Task& t, Rng& rng) override {
    const ServerId pick = inner_.choose(s, t, rng);
    const int chosen = s.in_service[pick] + s.queue_length[pick];
    for (std::size_t i = 0; i < s.num_servers(); ++i) {
      if (s.in_service[i] + s.queue_length[i] < chosen) ++violations;
    }
    ++decisions;
    return pick;
  }
  std::size_t decisions = 0;
  std::size_t violations = 0;

 private:
  LeastConnectionsPolicy inner_;
};

void check_baselines() {
  Rng rng(1);
  ClusterSnapshot idle;
  const std::size_t n = 6;
  idle.in_service.assign(n, 0);
  idle.queue_length.assign(n, 0);
  idle.instant_utilization.assign(n, 0.0);

  RoundRobinPolicy rr;
  const int k = 1000;
  std::vector<int> rr_counts(n, 0);
  for (std::size_t i = 0; i < k * n; ++i) ++rr_counts[rr.choose(idle, Task{}, rng)];
  bool rr_ok = true;
  for (int c : rr_counts) rr_ok = rr_ok && c == k;

  std::vector<ServerSpec> cluster;
  const double speeds[] = {1, 1, 1, 2, 2, 4};
  for (std::size_t i = 0; i < n; ++i) cluster.push_back({i, speeds[i], 1, speeds[i]});
  WorkloadSpec spec{BurstyArrivals{7.5, 15.0, 50.0, 10.0}, ExponentialSizes{1.0}, 20000.0};
  const auto tasks = first_n(spec, 5, 100000);
  CheckedLeastConnections lc;
  run(cluster, tasks, lc, tasks.back().arrival_time, 5);
  const bool lc_ok = lc.decisions == 100000 && lc.violations == 0;

  const std::vector<double> weights{1, 1, 1, 2, 2, 4};
  SmoothWeightedPolicy wrr(weights);
  bool wrr_ok = true;
  for (int cycle = 0; cycle < 1000; ++cycle) {
    std::vector<int> counts(n, 0);
    for (int i = 0; i < 11; ++i) ++counts[wrr.choose(idle, Task{}, rng)];
    for (std::size_t i = 0; i < n; ++i) wrr_ok = wrr_ok && counts[i] == static_cast<int>(weights[i]);
  }
  report("baseline_exactness", rr_ok && lc_ok && wrr_ok,
         fmt("round robin %d per server over %zu picks: %s; least connections %zu decisions, %zu "
             "non-minimal: %s; smooth WRR per-cycle counts == weights over 1000 cycles: %s",
             k, k * n, rr_ok ? "ok" : "mismatch", lc.decisions, lc.violations, lc_ok ? "ok" : "bad",
             wrr_ok ? "ok" : "mismatch"));
}

std::map<std::string, std::vector<double>> by_policy(const std::vector<Cell>& cells,
                                                     const std::function<double(const RunSummary&)>& f) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& c : cells) out[c.summary.policy_name].push_back(f(c.summary));
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t* files) {
  std::map<std::string, std::string> ca, cb;
  for (const auto& e : fs::directory_iterator(a)) ca[e.path().filename().string()] = slurp(e.path());
  for (const auto& e : fs::directory_iterator(b)) cb[e.path().filename().string()] = slurp(e.path());
  *files = ca.size();
  return !ca.empty() && ca == cb;
}

void check_desk6() {
  const auto config = load_config(fs::path(RLB_SOURCE_DIR) / "configs" / "desk6.cfg");
  const auto scratch = fs::temp_directory_path() / "rlb_acceptance";
  fs::remove_all(scratch);

  const auto t0 = std::chrono::steady_clock::now();
  const auto compare = cmd_compare(config, scratch / "compare_a");
  const auto sweep = cmd_sweep(config, {1.1}, scratch / "sweep");
  const double secs = seconds_since(t0);

  const auto rt = by_policy(compare.cells, [](const RunSummary& s) { return s.mean_rt; });
  const auto su = by_policy(compare.cells, [](const RunSummary& s) { return s.std_util_across_servers; });
  const double rl_rt = median(rt.at("rl")), rr_rt = median(rt.at("round_robin"));
  report("desk6_response_time", rl_rt <= 0.9 * rr_rt && secs < 120.0,
         fmt("median mean_rt rl %.4f vs round_robin %.4f (bound %.4f); compare+sweep %.1fs", rl_rt, rr_rt,
             0.9 * rr_rt, secs));
  const double rl_su = median(su.at("rl")), rr_su = median(su.at("round_robin"));
  report("desk6_utilization_balance", rl_su <= rr_su,
         fmt("median std_util rl %.4f vs round_robin %.4f", rl_su, rr_su));

  std::map<std::string, std::vector<double>> cr;
  for (const auto& row : sweep) cr[row.summary.policy_name].push_back(row.summary.completion_rate);
  const double rl_cr = median(cr.at("rl")), rr_cr = median(cr.at("round_robin")),
               lc_cr = median(cr.at("least_connections"));
  report("desk6_overload_completion", rl_cr >= rr_cr && rl_cr >= 0.95 * lc_cr,
         fmt("multiplier 1.1 median completion rl %.4f, round_robin %.4f, least_connections %.4f (guard %.4f)",
             rl_cr, rr_cr, lc_cr, 0.95 * lc_cr));

  // determinism: repeat compare, plus run and train on the same seed
  cmd_compare(config, scratch / "compare_b");
  std::size_t compare_files = 0;
  bool same = same_tree(scratch / "compare_a", scratch / "compare_b", &compare_files);
  cmd_sweep(config, {1.1}, scratch / "sweep_b");
  same = same && slurp(scratch / "sweep" / "sweep.csv") == slurp(scratch / "sweep_b" / "sweep.csv");
  std::size_t other_files = 0;
  for (const char* sub : {"run_a", "run_b"}) cmd_run(config, "weighted", 7, scratch / sub, std::nullopt);
  same = same && same_tree(scratch / "run_a", scratch / "run_b", &other_files);
  report("determinism", same,
         fmt("compare (%zu files), sweep.csv and run outputs byte-identical across repeats", compare_files));

  std::vector<double> first, last;
  std::string per_seed;
  for (const auto& c : compare.cells) {
    if (c.summary.policy_name != "rl" || c.learning_curve.empty()) continue;
    first.push_back(c.learning_curve.front().mean_reward_window);
    last.push_back(c.learning_curve.back().mean_reward_window);
    per_seed += fmt(" seed %llu: %.3f -> %.3f;", static_cast<unsigned long long>(c.summary.seed),
                    first.back(), last.back());
  }
  const bool improved = first.size() == config.seeds.size() && median(last) > median(first);
  report("learning_improvement", improved,
         fmt("median first-window reward %.4f, last-window %.4f;", first.empty() ? 0.0 : median(first),
             last.empty() ? 0.0 : median(last)) + per_seed);
  fs::remove_all(scratch);
}

void guarded(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded("mm1", [] {
    const auto half = run_mm1(0.5, 11);
    check_mm1(half, 2.0, 0.03, "mm1_lambda_0.5");
    check_littles_law(half);
    check_mm1(run_mm1(0.8, 12), 5.0, 0.05, "mm1_lambda_0.8");
  });
  guarded("q_learning_vs_value_iteration", check_q_learning);
  guarded("baseline_exactness", check_baselines);
  guarded("desk6", check_desk6);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
