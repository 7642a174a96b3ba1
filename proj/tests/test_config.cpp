#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kinoplan/config.hpp"

using namespace kinoplan;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("kinoplan_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("defaults round trip") {
  const RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(run_config_from_json(to_json(cfg)) == cfg);
  CHECK(run_config_from_json(Json::object()) == cfg);
  CHECK(run_config_from_json(Json::parse(to_json(cfg).dump())) == cfg);
}

TEST_CASE("edited config round trip through a file") {
  RunConfig cfg;
  cfg.resolution = 0.5;
  cfg.planner.search.rho = 3.5;
  cfg.planner.optimizer.lambda2 = 2.0;
  cfg.planner.time_adjust.preserve_endpoints = false;
  cfg.mission.sensing_radius = 7.0;
  cfg.bench.seed_count = 12;
  cfg.world.obstacle_kind = ObstacleKind::WallWithHole;
  cfg.world.free_regions.push_back(Box{Vec3(1, 2, 0), Vec3(3, 4, 2)});
  const auto path = scratch_dir("config") / "cfg.json";
  save_run_config(path.string(), cfg);
  const RunConfig back = load_run_config(path.string());
  CHECK(back == cfg);
  CHECK_FALSE(back == RunConfig{});
}

TEST_CASE("unknown and malformed keys") {
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"nope": 1})")), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"search": {"rhoo": 1}})")), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"search": 3})")), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"search": {"rho": "big"}})")), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"bench": {"seed_count": 1.5}})")), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"world": {"obstacle_kind": "blob"}})")), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"resolution": -1})")), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(Json::parse("[1, 2]")), std::invalid_argument);
  CHECK_THROWS(load_run_config("/nonexistent/kinoplan.json"));
}

TEST_CASE("apply_override") {
  RunConfig cfg;
  apply_override(cfg, "search.rho=7");
  CHECK(cfg.planner.search.rho == 7.0);
  apply_override(cfg, "resolution=0.4");
  CHECK(cfg.resolution == 0.4);
  apply_override(cfg, "world.obstacle_kind=wall-with-hole");
  CHECK(cfg.world.obstacle_kind == ObstacleKind::WallWithHole);
  apply_override(cfg, "time_adjust.preserve_endpoints=false");
  CHECK_FALSE(cfg.planner.time_adjust.preserve_endpoints);
  apply_override(cfg, "world.extent=[10,20,3]");
  CHECK(cfg.world.extent == Vec3(10, 20, 3));
  const RunConfig before = cfg;
  CHECK_THROWS_AS(apply_override(cfg, "search.nope=1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(cfg, "search.rho"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(cfg, "=3"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(cfg, "search.rho=-1"), std::invalid_argument);
  CHECK(cfg == before);
}

TEST_CASE("obstacle kind names") {
  for (ObstacleKind k : {ObstacleKind::BoxPillar, ObstacleKind::WallWithHole}) CHECK(obstacle_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(obstacle_kind_from_string("sphere"), std::invalid_argument);
}

TEST_CASE("scenario") {
  const Json j = Json::parse(R"({
    "start": [1, 2, 1], "goal": [9, 2, 1],
    "reveals": [{"time": 1.5, "min": [4, 0, 0], "max": [5, 4, 3]}],
    "config": {"mission": {"sensing_radius": 4}, "world": {"obstacle_count": 0}}
  })");
  RunConfig base;
  base.planner.search.rho = 4.0;
  const Scenario s = scenario_from_json(j, "", base);
  CHECK(s.map_path.empty());
  CHECK(s.start.position == Vec3(1, 2, 1));
  CHECK(s.goal.position == Vec3(9, 2, 1));
  CHECK(s.start.velocity.isZero());
  REQUIRE(s.reveals.size() == 1);
  CHECK(s.reveals[0].time == 1.5);
  CHECK(s.reveals[0].box.min == Vec3(4, 0, 0));
  CHECK(s.reveals[0].box.max == Vec3(5, 4, 3));
  CHECK(s.config.mission.sensing_radius == 4.0);
  CHECK(s.config.planner.search.rho == 4.0);
  CHECK(s.config.world.obstacle_count == 0);

  const Scenario back = scenario_from_json(to_json(s), "", base);
  CHECK(back.start.position == s.start.position);
  CHECK(back.goal.position == s.goal.position);
  CHECK(back.config == s.config);
  REQUIRE(back.reveals.size() == 1);
  CHECK(back.reveals[0].box.max == s.reveals[0].box.max);

  const Scenario rel = scenario_from_json(Json::parse(R"({"map": "m.json", "start": [1,1,1], "goal": [2,2,1]})"), "/data");
  CHECK(std::filesystem::path(rel.map_path) == std::filesystem::path("/data") / "m.json");

  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"start": [1,1,1], "goal": [2,2,1], "extra": 0})")),
                  std::invalid_argument);
  CHECK_THROWS(scenario_from_json(Json::parse(R"({"start": [1,1,1]})")));
  CHECK_THROWS(scenario_from_json(Json::parse(R"({"start": [1,1], "goal": [2,2,1]})")));
}

TEST_CASE("scenario world") {
  const auto dir = scratch_dir("scenario");
  Scenario s;
  s.config.world.extent = Vec3(6, 4, 2);
  s.config.world.obstacle_count = 0;
  s.start.position = Vec3(1, 1, 1);
  s.goal.position = Vec3(5, 3, 1);
  const VoxelGrid generated = scenario_world(s);
  CHECK(generated.dims() == Vec3i(30, 20, 10));
  CHECK(generated.raw_count() == 0);

  std::ofstream(dir / "scenario.json") << R"({"map": "missing.json", "start": [1,1,1], "goal": [2,2,1]})";
  const Scenario missing = load_scenario((dir / "scenario.json").string());
  CHECK(missing.map_path == (dir / "missing.json").string());
  CHECK_THROWS(scenario_world(missing));
}
