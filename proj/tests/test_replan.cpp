#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "kinoplan/io.hpp"
#include "kinoplan/replan.hpp"

using namespace kinoplan;

namespace {

VoxelGrid pillar_world() {
  VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(150, 50, 15), 0.3);
  for (int k = 0; k < 15; ++k)
    for (int i = 70; i < 74; ++i)
      for (int j = 10; j < 14; ++j) g.add_obstacle({i, j, k});
  return g;
}

bool known_subset_of_truth(const MissionState& m) {
  for (std::size_t k = 0; k < m.known_world.size(); ++k)
    if (m.known_world.raw_layer()[k] && !m.true_world.raw_layer()[k]) return false;
  return true;
}

}  // namespace

TEST_CASE("sense") {
  const VoxelGrid truth = pillar_world();
  const PlannerConfig pcfg;
  MissionConfig mcfg;
  SUBCASE("far from obstacles") {
    MissionState m = make_mission_state(truth, {{2, 2, 1}, Vec3::Zero()}, mcfg, pcfg);
    CHECK(sense(m).empty());
    CHECK(m.known_world.raw_count() == 0);
  }
  SUBCASE("full reveal and idempotence") {
    mcfg.sensing_radius = 100.0;
    MissionState m = make_mission_state(truth, {{2, 2, 1}, Vec3::Zero()}, mcfg, pcfg);
    const auto changed = sense(m);
    CHECK(changed.size() == truth.raw_count());
    CHECK(m.known_world.raw_layer() == truth.raw_layer());
    CHECK(m.known_world.inflated_layer() == truth.inflated_layer());
    CHECK(sense(m).empty());
    const DistanceField full = DistanceField::build(m.known_world, pcfg.field_cap());
    for (std::size_t k = 0; k < full.distances().size(); ++k)
      REQUIRE(m.field.distances()[k] == doctest::Approx(full.distances()[k]));
  }
  SUBCASE("partial reveal") {
    MissionState m = make_mission_state(truth, {{10, 2.4, 1}, Vec3::Zero()}, mcfg, pcfg);
    const auto changed = sense(m);
    CHECK_FALSE(changed.empty());
    CHECK(changed.size() < truth.raw_count());
    CHECK(known_subset_of_truth(m));
    for (const auto& v : changed) CHECK((truth.index_to_world(v) - m.robot.position).norm() <= 5.0);
    CHECK(sense(m).empty());
  }
}

TEST_CASE("check_trigger") {
  const VoxelGrid truth = pillar_world();
  const PlannerConfig pcfg;
  const MissionConfig mcfg;
  MissionState m = make_mission_state(truth, {{2, 2.4, 1}, Vec3::Zero()}, mcfg, pcfg);
  Trajectory::Points q(3, 12);
  for (int i = 0; i < 12; ++i) q.col(i) = Vec3(2 + 2.0 * i, 2.4, 1);
  m.trajectory = Trajectory::uniform(q, 3, 0.5);
  m.reaches_goal = true;
  CHECK_FALSE(check_trigger(m, {}, 0.01).has_value());

  m.clock = 0.6;
  CHECK_FALSE(check_trigger(m, {}, 0.01).has_value());
  m.reaches_goal = false;
  CHECK(check_trigger(m, {}, 0.01) == TriggerReason::Periodic);
  m.clock = 0.3;
  CHECK_FALSE(check_trigger(m, {}, 0.01).has_value());

  m.robot.position = Vec3(12, 2.4, 1);
  const auto revealed = sense(m);
  REQUIRE_FALSE(revealed.empty());
  CHECK(check_trigger(m, revealed, 0.01) == TriggerReason::Collision);
  m.clock = 0.6;
  CHECK(check_trigger(m, revealed, 0.01) == TriggerReason::Collision);
}

TEST_CASE("plan_local") {
  const VoxelGrid truth = pillar_world();
  const PlannerConfig pcfg;
  const MissionConfig mcfg;
  SUBCASE("goal inside the sphere") {
    MissionState m = make_mission_state(truth, {{2, 5, 1}, Vec3::Zero()}, mcfg, pcfg);
    sense(m);
    const State goal{{5.5, 6, 1.5}, Vec3::Zero()};
    const PlanResult local = plan_local(m, m.robot, 0.0, goal, pcfg);
    const PlanResult global = plan(m.robot, goal, m.known_world, m.field, pcfg);
    REQUIRE(local.usable());
    CHECK_FALSE(local.search.reached_horizon);
    CHECK(local.final->control_points() == global.final->control_points());
    CHECK(local.final->knots() == global.final->knots());
  }
  SUBCASE("goal beyond the sphere") {
    MissionState m = make_mission_state(truth, {{2, 5, 1}, Vec3::Zero()}, mcfg, pcfg);
    sense(m);
    const State goal{{28, 5, 1}, Vec3::Zero()};
    const PlanResult r = plan_local(m, m.robot, 0.0, goal, pcfg);
    REQUIRE(r.usable());
    CHECK(r.search.reached_horizon);
    const Trajectory& fin = *r.final;
    CHECK((fin.eval(fin.t_end()) - m.robot.position).norm() <= mcfg.sensing_radius);
    CHECK(r.timings.search > 0);
    CHECK(r.timings.optimize > 0);
    CHECK(r.timings.adjust > 0);
  }
}

TEST_CASE("missions") {
  const PlannerConfig pcfg;
  const MissionConfig mcfg;
  SUBCASE("empty world") {
    const VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(100, 50, 15), 0.3);
    const MissionLog log = run_mission(g, {{8, 5, 1}, Vec3::Zero()}, {{12, 5, 1}, Vec3::Zero()}, pcfg, mcfg);
    CHECK(log.success);
    CHECK(log.outcome == "goal-reached");
    CHECK(log.replans.size() == 1);
    CHECK(log.collision_triggers == 0);
    CHECK(log.collisions == 0);
  }
  SUBCASE("long flight through clutter") {
    const VoxelGrid g = pillar_world();
    const MissionLog log = run_mission(g, {{2, 2.4, 1}, Vec3::Zero()}, {{27, 2.4, 1}, Vec3::Zero()}, pcfg, mcfg);
    CHECK(log.success);
    CHECK(log.collisions == 0);
    CHECK(log.replans.size() > 1);
    CHECK(log.max_position_jump < 1e-6);
    for (const auto& r : log.replans)
      if (r.adopted) CHECK(r.velocity_jump < 1e-6);
    for (std::size_t k = 1; k < log.executed.size(); ++k) {
      CHECK(log.executed[k].time > log.executed[k - 1].time);
      CHECK((log.executed[k].state.position - log.executed[k - 1].state.position).norm() <= 3.0 * mcfg.tick * 1.01);
    }
  }
  SUBCASE("wall revealed mid-flight") {
    const VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(150, 50, 15), 0.3);
    const std::vector<ScriptedReveal> reveals{{3.0, Box{Vec3(19.5, 0, 0), Vec3(20.0, 7.0, 3.0)}}};
    const MissionLog log = run_mission(g, {{11, 5, 1}, Vec3::Zero()}, {{27, 5, 1}, Vec3::Zero()}, pcfg, mcfg, reveals);
    CHECK(log.success);
    CHECK(log.collision_triggers >= 1);
    CHECK(log.collisions == 0);
    CHECK(log.max_position_jump < 1e-6);
  }
  SUBCASE("sealed goal") {
    VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(100, 50, 15), 0.3);
    for (int i = 60; i <= 80; ++i)
      for (int j = 15; j <= 35; ++j)
        for (int k = 0; k < 15; ++k)
          if (i == 60 || i == 80 || j == 15 || j == 35 || k == 0 || k == 14) g.add_obstacle({i, j, k});
    MissionConfig quick = mcfg;
    quick.timeout = 20.0;
    const MissionLog log = run_mission(g, {{4, 5, 1}, Vec3::Zero()}, {{14, 5, 1.4}, Vec3::Zero()}, pcfg, quick);
    CHECK_FALSE(log.success);
    CHECK((log.outcome == "timeout" || log.outcome == "trapped"));
    CHECK(log.collisions == 0);
  }
  SUBCASE("blocked start") {
    VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(50, 50, 15), 0.3);
    g.add_obstacle({10, 10, 5});
    const MissionLog log = run_mission(g, {g.index_to_world({10, 10, 5}), Vec3::Zero()}, {{8, 8, 1}, Vec3::Zero()}, pcfg, mcfg);
    CHECK_FALSE(log.success);
    CHECK(log.outcome == "start-blocked");
  }
}

TEST_CASE("mission output") {
  const VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(100, 50, 15), 0.3);
  const MissionLog log = run_mission(g, {{8, 5, 1}, Vec3::Zero()}, {{12, 5, 1}, Vec3::Zero()}, PlannerConfig{}, MissionConfig{});
  std::ostringstream js, csv;
  write_mission_json(js, log);
  const Json j = Json::parse(js.str());
  CHECK(j["success"] == true);
  CHECK(j["replans"].size() == 1);
  CHECK(j["replans"][0]["reason"] == "initial");
  const Trajectory back = trajectory_from_json(j["replans"][0]["trajectory"]);
  CHECK(back.control_points() == log.replans[0].trajectory->control_points());
  write_executed_csv(csv, log);
  CHECK(csv.str().rfind("t,", 0) == 0);
}
