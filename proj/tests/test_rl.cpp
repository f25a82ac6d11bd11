#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "rlbalance/agent.hpp"
#include "rlbalance/simulator.hpp"
#include "rlbalance/workload.hpp"

using namespace rlbalance;

namespace {

ClusterSnapshot snapshot_of(const std::vector<double>& utils, int active = 0, int slots = 1) {
  ClusterSnapshot s;
  s.instant_utilization = utils;
  s.in_service.assign(utils.size(), 0);
  s.queue_length.assign(utils.size(), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < utils.size(); ++i) {
    s.in_service[i] = static_cast<int>(std::lround(utils[i] * slots));
    total += utils[i];
  }
  s.active_tasks = active;
  s.system_load = utils.empty() ? 0.0 : total / static_cast<double>(utils.size());
  return s;
}

AgentConfig plain_config(int util_bins, int active_bins) {
  AgentConfig c;
  c.util_bins = util_bins;
  c.active_bins = active_bins;
  c.queue_bins = 0;
  return c;
}

DiscreteState key(std::uint16_t v) { return DiscreteState{{v}, 0, 0, {}}; }

std::vector<ServerSpec> cluster_of(const std::vector<double>& speeds) {
  std::vector<ServerSpec> out;
  for (std::size_t i = 0; i < speeds.size(); ++i) out.push_back({i, speeds[i], 1, speeds[i]});
  return out;
}

}  // namespace

TEST_CASE("discretize examples") {
  const auto s = discretize(snapshot_of({0.0, 0.37, 1.0}), plain_config(4, 4));
  CHECK(s.util_bins == std::vector<std::uint16_t>{0, 1, 3});
  CHECK(s.queue_bins.empty());

  const auto idle = discretize(snapshot_of({0.0, 0.0, 0.0, 0.0}), plain_config(3, 4));
  CHECK(idle.util_bins == std::vector<std::uint16_t>{0, 0, 0, 0});
  CHECK(idle.load_bin == 0);
  CHECK(idle.active_tasks_bin == 0);

  const auto two = discretize(snapshot_of({0.5, 0.5}, 4), plain_config(3, 3));
  CHECK(two.load_bin == 1);          // floor(0.5 * 3)
  CHECK(two.active_tasks_bin == 2);  // min(4 / 2, 3 - 1)
}

TEST_CASE("discretize adds capped queue bins when configured") {
  auto snap = snapshot_of({1.0, 1.0, 0.0});
  snap.queue_length = {0, 7, 0};
  auto config = plain_config(3, 4);
  config.queue_bins = 3;
  CHECK(discretize(snap, config).queue_bins == std::vector<std::uint16_t>{0, 2, 0});
}

TEST_CASE("discretize is monotone in each server's utilization") {
  Rng gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int bins = 1 + static_cast<int>(gen.uniform_index(6));
    std::vector<double> utils(4);
    for (auto& u : utils) u = gen.uniform();
    const std::size_t i = gen.uniform_index(4);
    const auto before = discretize(snapshot_of(utils), plain_config(bins, 3));
    utils[i] = std::min(1.0, utils[i] + gen.uniform());
    const auto after = discretize(snapshot_of(utils), plain_config(bins, 3));
    CHECK(after.util_bins[i] >= before.util_bins[i]);
    CHECK(after.util_bins[i] < bins);
  }
}

TEST_CASE("select_action greedy choices") {
  QTable q(3);
  const auto s = key(1);
  q.set_entry(s, 0, 0.1, 1);
  q.set_entry(s, 1, 0.9, 1);
  q.set_entry(s, 2, 0.9, 1);
  Rng rng(1);
  CHECK(select_action(q, s, 0.0, rng) == 1);
  CHECK(select_action(q, key(2), 0.0, rng) == 0);
}

TEST_CASE("select_action with epsilon one is uniform") {
  QTable q(4);
  q.set_entry(key(0), 2, 5.0, 1);
  Rng rng(11);
  std::vector<int> counts(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[select_action(q, key(0), 1.0, rng)];
  for (int c : counts) CHECK(std::abs(c / static_cast<double>(draws) - 0.25) < 0.01);
}

TEST_CASE("select_action consumes one draw when exploiting, two when exploring") {
  QTable q(4);
  Rng greedy(5), greedy_ref(5);
  select_action(q, key(0), 0.0, greedy);
  greedy_ref.uniform();
  CHECK(greedy.next_u64() == greedy_ref.next_u64());

  Rng explore(5), explore_ref(5);
  select_action(q, key(0), 1.0, explore);
  explore_ref.uniform();
  explore_ref.uniform_index(4);
  CHECK(explore.next_u64() == explore_ref.next_u64());
}

TEST_CASE("argmax is invariant to a constant shift") {
  Rng gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    QTable a(5), b(5);
    const double shift = (gen.uniform() - 0.5) * 100.0;
    for (std::size_t act = 0; act < 5; ++act) {
      const double v = std::round((gen.uniform() - 0.5) * 8.0);  // integers so ties happen
      a.set_entry(key(0), act, v, 1);
      b.set_entry(key(0), act, v + shift, 1);
    }
    Rng ra(1), rb(1);
    CHECK(select_action(a, key(0), 0.0, ra) == select_action(b, key(0), 0.0, rb));
  }
}

TEST_CASE("compute_reward") {
  AgentConfig c;
  c.reward = {1.0, 0.5};
  CompletedTaskRecord r{};
  r.response_time = 2.0;
  CHECK(compute_reward(r, snapshot_of({0.2, 0.6, 0.4}), c) == doctest::Approx(-2.2));

  r.response_time = 0.0;
  CHECK(compute_reward(r, snapshot_of({0.5, 0.5}), c) == 0.0);

  c.reward.kappa = 0.0;
  r.response_time = 1.5;
  const double one = compute_reward(r, snapshot_of({0.0, 1.0}), c);
  r.response_time = 3.0;
  CHECK(compute_reward(r, snapshot_of({1.0, 0.0}), c) == doctest::Approx(2.0 * one));
}

TEST_CASE("update_q examples") {
  AgentConfig c;
  c.alpha = 0.5;
  c.gamma = 0.9;
  QTable q(2);
  q.set_entry(key(1), 0, 2.0, 1);
  CHECK(update_q(q, key(0), 0, 1.0, key(1), c) == doctest::Approx(1.4));
  CHECK(q.visits(key(0), 0) == 1);

  c.alpha = 0.1;
  QTable q2(2);
  q2.set_entry(key(0), 1, 1.0, 3);
  q2.set_entry(key(1), 0, 0.5, 1);
  CHECK(update_q(q2, key(0), 1, -2.2, key(1), c) == doctest::Approx(0.725));
  CHECK(q2.visits(key(0), 1) == 4);

  c.alpha = 0.0;
  CHECK(update_q(q2, key(0), 1, 1000.0, key(1), c) == q2.value(key(0), 1));
  CHECK(q2.value(key(0), 1) == doctest::Approx(0.725));

  CHECK_THROWS_AS(update_q(q2, key(0), 0, std::nan(""), key(1), c), ValidationError);
  CHECK_THROWS_AS(update_q(q2, key(0), 0, INFINITY, key(1), c), ValidationError);
}

TEST_CASE("Q-values stay within the discounted reward bounds") {
  Rng gen(21);
  AgentConfig c;
  c.alpha = 0.3;
  c.gamma = 0.8;
  const double r_min = -3.0, r_max = 1.0;
  QTable q(3);
  for (int i = 0; i < 20000; ++i) {
    const auto s = key(static_cast<std::uint16_t>(gen.uniform_index(5)));
    const auto s2 = key(static_cast<std::uint16_t>(gen.uniform_index(5)));
    const double r = r_min + (r_max - r_min) * gen.uniform();
    const double v = update_q(q, s, gen.uniform_index(3), r, s2, c);
    CHECK(v >= r_min / (1 - c.gamma) - 1e-9);
    CHECK(v <= r_max / (1 - c.gamma) + 1e-9);
  }
}

TEST_CASE("epsilon schedule") {
  AgentConfig c;
  c.epsilon_start = 0.2;
  c.epsilon_end = 0.01;
  c.epsilon_decay_tasks = 100;
  CHECK(epsilon_at(c, 0) == 0.2);
  CHECK(epsilon_at(c, 50) == doctest::Approx(0.105));
  CHECK(epsilon_at(c, 100) == 0.01);
  CHECK(epsilon_at(c, 1000000) == 0.01);
}

TEST_CASE("agent validation") {
  AgentConfig c;
  c.alpha = 0.0;
  CHECK_THROWS_AS(validate_agent(c), ValidationError);
  c = AgentConfig{};
  c.gamma = 1.0;
  CHECK_THROWS_AS(validate_agent(c), ValidationError);
  c = AgentConfig{};
  c.epsilon_end = 0.5;
  CHECK_THROWS_AS(validate_agent(c), ValidationError);
  c = AgentConfig{};
  c.util_bins = 0;
  CHECK_THROWS_AS(validate_agent(c), ValidationError);
  CHECK_NOTHROW(validate_agent(AgentConfig{}));
}

TEST_CASE("training on an empty trace") {
  const auto result = train(cluster_of({1.0, 2.0}), {}, AgentConfig{}, 1);
  CHECK(result.q.empty());
  CHECK(result.learning_curve.empty());
}

TEST_CASE("training is reproducible") {
  WorkloadSpec spec{SteadyArrivals{1.5}, ExponentialSizes{1.0}, 4000.0};
  const auto trace = generate_trace(spec, 3);
  AgentConfig c;
  c.epsilon_decay_tasks = 2000;
  const auto a = train(cluster_of({1.0, 1.0, 2.0}), trace.tasks, c, 9);
  const auto b = train(cluster_of({1.0, 1.0, 2.0}), trace.tasks, c, 9);
  CHECK(a.q == b.q);
  CHECK(serialize_qtable(a.q) == serialize_qtable(b.q));
  REQUIRE(a.learning_curve.size() == b.learning_curve.size());
  CHECK(a.learning_curve.size() == trace.tasks.size() / QLearningPolicy::kCurveWindow);
  const auto c2 = train(cluster_of({1.0, 1.0, 2.0}), trace.tasks, c, 10);
  CHECK_FALSE(a.q == c2.q);
}

TEST_CASE("greedy agent prefers the fast server") {
  const auto cluster = cluster_of({1.0, 10.0});
  WorkloadSpec train_spec{SteadyArrivals{4.0}, ExponentialSizes{1.0}, 12500.0};
  auto trace = generate_trace(train_spec, 1).tasks;
  trace.resize(std::min<std::size_t>(trace.size(), 50000));
  AgentConfig c;
  c.epsilon_decay_tasks = 25000;
  c.reward.t_ref = 1.0 / 5.5;
  const auto trained = train(cluster, trace, c, 1);

  WorkloadSpec eval_spec{SteadyArrivals{4.0}, ExponentialSizes{1.0}, 2000.0};
  const auto eval = generate_trace(eval_spec, 2);
  QLearningPolicy greedy(std::make_shared<QTable>(trained.q), c, QLearningPolicy::Mode::Greedy);
  const auto result = run(cluster, eval.tasks, greedy, eval_spec.horizon, 2);
  std::size_t fast = 0;
  for (const auto& r : result.records) fast += r.server_id == 1;
  CHECK(2 * fast > result.records.size());

  // static oracle: all-to-fast beats all-to-slow on the same trace
  struct Fixed final : Policy {
    explicit Fixed(ServerId t) : target(t) {}
    std::string name() const override { return "fixed"; }
    ServerId choose(const ClusterSnapshot&, const Task&, Rng&) override { return target; }
    ServerId target;
  };
  Fixed slow(0), quick(1);
  auto mean_rt = [](const RunResult& rr) {
    double s = 0.0;
    for (const auto& r : rr.records) s += r.response_time;
    return s / static_cast<double>(rr.records.size());
  };
  CHECK(mean_rt(run(cluster, eval.tasks, quick, eval_spec.horizon, 2)) <
        mean_rt(run(cluster, eval.tasks, slow, eval_spec.horizon, 2)));
}

TEST_CASE("Q-table persistence is exact") {
  QTable q(3);
  q.set_entry(DiscreteState{{0, 2, 1}, 3, 1, {}}, 2, 0.1 + 0.2, 7);
  q.set_entry(DiscreteState{{1, 1, 1}, 0, 2, {0, 2, 1}}, 0, -1.0 / 3.0, 1);
  q.set_entry(DiscreteState{{0, 0, 0}, 0, 0, {}}, 1, 1e-300, 12345678901ULL);
  const auto text = serialize_qtable(q);
  const auto back = deserialize_qtable(text);
  CHECK(back == q);
  CHECK(serialize_qtable(back) == text);
  CHECK(text.rfind("rl-balance-qtable 1\nnum_actions 3\nstate,action,q_value,visit_count\n", 0) == 0);

  const auto path = std::filesystem::temp_directory_path() / "rlb_qtable_roundtrip.txt";
  save_qtable(q, path);
  CHECK(load_qtable(path) == q);
  std::filesystem::remove(path);

  CHECK_THROWS(deserialize_qtable("rl-balance-qtable 2\nnum_actions 3\n"));
  CHECK_THROWS(deserialize_qtable(text + "0:0:0|0|0,5,1.0,1\n"));
}
