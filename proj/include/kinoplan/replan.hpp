#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kinoplan/pipeline.hpp"

namespace kinoplan {

struct MissionConfig {
  double sensing_radius = 5.0;
  double replan_period = 0.5;   ///< seconds between periodic replans
  double tick = 0.05;           ///< simulation step (s)
  double commit_latency = 0.05; ///< new plans start this far ahead on the current trajectory (s)
  double timeout = 120.0;       ///< mission clock limit (s)
  double goal_tolerance = 0.5;  ///< arrival radius (m)
  double audit_step = 0.005;    ///< ground-truth collision sampling step (s)
  int max_failed_replans = 40;  ///< consecutive planning failures before giving up

  void validate() const;
};

/// Obstacle box that appears in the true world at `time`.
struct ScriptedReveal {
  double time = 0.0;
  Box box;
};

enum class TriggerReason { Initial, Collision, Periodic };
std::string_view to_string(TriggerReason r);

struct MissionState {
  VoxelGrid true_world;
  VoxelGrid known_world;
  DistanceField field;
  std::optional<Trajectory> trajectory;
  double clock = 0.0;
  double last_plan_time = 0.0;
  State robot;
  double sensing_radius = 5.0;
  double replan_period = 0.5;
  bool reaches_goal = false;  ///< current trajectory ends at the global goal, not the horizon
  bool map_changed = false;   ///< voxels revealed since the last adopted plan
};

/// Empty known world and field matching `true_world`'s geometry, robot at `start`.
MissionState make_mission_state(const VoxelGrid& true_world, const State& start, const MissionConfig& mcfg,
                                const PlannerConfig& pcfg);

/// Reveals true raw voxels whose centers lie within the sensing radius;
/// returns the newly known ones and updates the field around them.
std::vector<Vec3i> sense(MissionState& m);

/// Collision when the remaining trajectory hits a known inflated voxel, else
/// periodic when the replan period has elapsed and the plan is stale: it
/// stops at the horizon or the map changed since it was made.
std::optional<TriggerReason> check_trigger(const MissionState& m, const std::vector<Vec3i>& newly_revealed,
                                           double check_step);

/// Plans from `from` (at time `t0`) toward `goal`, limited to the sensing sphere.
PlanResult plan_local(const MissionState& m, const State& from, double t0, const State& goal,
                      const PlannerConfig& cfg);

struct ReplanRecord {
  double time = 0.0;         ///< clock when triggered
  double switch_time = 0.0;  ///< when the new trajectory takes over
  TriggerReason reason = TriggerReason::Initial;
  PlanStatus status = PlanStatus::SearchFailed;
  bool adopted = false;
  StageTimings timings;
  double position_jump = 0.0;
  double velocity_jump = 0.0;
  std::optional<Trajectory> trajectory;
};

struct MissionLog {
  bool success = false;
  std::string outcome;  ///< "goal-reached", "timeout", "trapped", "start-blocked"
  double duration = 0.0;
  std::vector<ReplanRecord> replans;
  std::vector<TimedState> executed;
  int collisions = 0;   ///< audit samples inside true inflated obstacles
  double max_position_jump = 0.0;
  int collision_triggers = 0;
  int periodic_triggers = 0;
};

MissionLog run_mission(const VoxelGrid& true_world, const State& start, const State& goal,
                       const PlannerConfig& pcfg, const MissionConfig& mcfg,
                       const std::vector<ScriptedReveal>& reveals = {});

void write_mission_json(std::ostream& os, const MissionLog& log);
void write_executed_csv(std::ostream& os, const MissionLog& log);

}  // namespace kinoplan
