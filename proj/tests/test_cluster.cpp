#include "doctest.h"
#include "rlbalance/cluster.hpp"

using namespace rlbalance;

namespace {

Task task(TaskId id, double arrival, double size) {
  return Task{.id = id, .arrival_time = arrival, .size = size, .deadline_window = std::nullopt};
}

ServerSpec server(ServerId id, double speed, int slots) {
  return ServerSpec{.server_id = id, .speed = speed, .slots = slots, .weight = speed};
}

}  // namespace

TEST_CASE("idle server starts the task immediately") {
  Cluster c({server(0, 2.0, 1)});
  auto done = c.assign_task(task(0, 10.0, 4.0), 0, 10.0);
  REQUIRE(done.has_value());
  CHECK(done->time == 12.0);
  CHECK(done->task_id == 0);
}

TEST_CASE("busy single-slot server queues the task") {
  Cluster c({server(0, 1.0, 1)});
  c.assign_task(task(0, 0.0, 1.0), 0, 0.0);
  CHECK(c.snapshot(0.0).queue_length[0] == 0);
  auto second = c.assign_task(task(1, 0.5, 1.0), 0, 0.5);
  CHECK_FALSE(second.has_value());
  CHECK(c.snapshot(0.5).queue_length[0] == 1);
}

TEST_CASE("second slot serves in parallel") {
  Cluster c({server(0, 1.0, 2)});
  c.assign_task(task(0, 0.0, 1.0), 0, 0.0);
  auto second = c.assign_task(task(1, 0.2, 1.0), 0, 0.2);
  REQUIRE(second.has_value());
  CHECK(second->time == doctest::Approx(1.2));
}

TEST_CASE("unknown server is a fatal error") {
  Cluster c({server(0, 1.0, 1)});
  CHECK_THROWS_AS(c.assign_task(task(0, 0.0, 1.0), 3, 0.0), EngineError);
}

TEST_CASE("queued task starts when a slot frees") {
  Cluster c({server(0, 2.0, 1)});
  c.assign_task(task(0, 9.0, 4.0), 0, 9.0);   // ends at 11
  c.assign_task(task(1, 10.0, 4.0), 0, 10.0);  // waits
  auto out = c.complete_task(0, 0, 11.0);
  REQUIRE(out.next.has_value());
  CHECK(out.next->task_id == 1);
  CHECK(out.next->time == 13.0);
  auto rec = c.complete_task(0, 1, 13.0).record;
  CHECK(rec.arrival_time == 10.0);
  CHECK(rec.start_time == 11.0);
  CHECK(rec.completion_time == 13.0);
  CHECK(rec.response_time == 3.0);
}

TEST_CASE("instant service response time equals size over speed") {
  Cluster c({server(0, 4.0, 1)});
  auto done = c.assign_task(task(0, 1.0, 2.0), 0, 1.0);
  auto rec = c.complete_task(0, 0, done->time).record;
  CHECK(rec.response_time == doctest::Approx(0.5));
  CHECK(rec.start_time == rec.arrival_time);
}

TEST_CASE("completing a task that is not in service is fatal") {
  Cluster c({server(0, 1.0, 1)});
  CHECK_THROWS_AS(c.complete_task(0, 5, 1.0), EngineError);
  c.assign_task(task(0, 0.0, 1.0), 0, 0.0);
  CHECK_THROWS_AS(c.complete_task(0, 0, 0.5), EngineError);
}

TEST_CASE("snapshot utilizations") {
  Cluster idle({server(0, 1.0, 1), server(1, 1.0, 1)});
  auto s0 = idle.snapshot(0.0);
  CHECK(s0.instant_utilization == std::vector<double>{0.0, 0.0});
  CHECK(s0.system_load == 0.0);

  Cluster four({server(0, 1.0, 4)});
  four.assign_task(task(0, 0.0, 1.0), 0, 0.0);
  four.assign_task(task(1, 0.0, 1.0), 0, 0.0);
  CHECK(four.snapshot(0.0).instant_utilization[0] == 0.5);

  Cluster pair({server(0, 1.0, 1), server(1, 1.0, 1)});
  pair.assign_task(task(0, 0.0, 1.0), 1, 0.0);
  auto s = pair.snapshot(0.0);
  CHECK(s.instant_utilization == std::vector<double>{0.0, 1.0});
  CHECK(s.system_load == 0.5);
  CHECK(s.active_tasks == 1);
}

TEST_CASE("cluster validation") {
  CHECK_THROWS_AS(validate_cluster({}), ValidationError);
  CHECK_THROWS_AS(validate_cluster({server(1, 1.0, 1)}), ValidationError);
  CHECK_THROWS_AS(validate_cluster({server(0, 0.0, 1)}), ValidationError);
  CHECK_THROWS_AS(validate_cluster({server(0, 1.0, 0)}), ValidationError);
  auto bad_weight = server(0, 1.0, 1);
  bad_weight.weight = -1.0;
  CHECK_THROWS_AS(validate_cluster({bad_weight}), ValidationError);
}

TEST_CASE("busy time is clipped at the accounting horizon") {
  Cluster c({server(0, 1.0, 2)}, 10.0);
  c.assign_task(task(0, 0.0, 5.0), 0, 0.0);
  c.complete_task(0, 0, 5.0);
  CHECK(c.server(0).busy_time_at(10.0, 10.0) == doctest::Approx(5.0));

  Cluster late({server(0, 1.0, 1)}, 10.0);
  late.assign_task(task(0, 8.0, 5.0), 0, 8.0);
  late.complete_task(0, 0, 13.0);
  CHECK(late.server(0).busy_work_time == doctest::Approx(2.0));
}
