#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kinoplan/io.hpp"
#include "kinoplan/pipeline.hpp"
#include "kinoplan/replan.hpp"
#include "kinoplan/voxel_map.hpp"

namespace kinoplan {

/// Benchmark instance layout: start and goal sit `separation` apart along x,
/// centred in the world at height `altitude`, each inside a free box.
struct BenchConfig {
  std::uint64_t first_seed = 0;
  int seed_count = 100;
  double separation = 17.0;
  double altitude = 1.0;
  double free_margin = 1.0;        ///< half-size of the free boxes around start and goal (m)
  int threads = 1;
  int reference_iters = 1000;      ///< iterations of the reference run for cost normalization; 0 disables
  int convergence_window = 100;    ///< iterations within which normalized cost must drop below 0.1

  std::vector<std::uint64_t> seeds() const;
  void validate() const;
};

struct RunConfig {
  WorldSpec world;
  double resolution = 0.2;
  PlannerConfig planner;
  MissionConfig mission;
  BenchConfig bench;
  std::string out_dir = "out";

  void validate() const;
  bool operator==(const RunConfig&) const;
};

Json to_json(const RunConfig& cfg);
/// Starts from defaults and applies `j`; unknown keys and invalid values throw std::invalid_argument.
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

/// Applies "section.key=value"; the value is parsed as JSON, falling back to a string.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Mission script: {"map": path} or the config's generated world, plus
/// "start", "goal", optional "reveals" [{"time", "min", "max"}] and "config" overrides.
struct Scenario {
  std::string map_path;  ///< empty: generate from config.world
  RunConfig config;
  State start;
  State goal;
  std::vector<ScriptedReveal> reveals;
};

/// "config" is merged over `base`. Relative map paths are resolved against `base_dir`.
Scenario scenario_from_json(const Json& j, const std::string& base_dir = "", const RunConfig& base = {});
Scenario load_scenario(const std::string& path, const RunConfig& base = {});
Json to_json(const Scenario& s);
VoxelGrid scenario_world(const Scenario& s);

std::string to_string(ObstacleKind k);
ObstacleKind obstacle_kind_from_string(const std::string& s);

}  // namespace kinoplan
