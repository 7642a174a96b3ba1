#include "kinoplan/replan.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "kinoplan/io.hpp"

namespace kinoplan {

void MissionConfig::validate() const {
  if (!(sensing_radius > 0)) throw std::invalid_argument("mission: sensing_radius must be > 0");
  if (!(replan_period > 0)) throw std::invalid_argument("mission: replan_period must be > 0");
  if (!(tick > 0)) throw std::invalid_argument("mission: tick must be > 0");
  if (commit_latency < 0) throw std::invalid_argument("mission: commit_latency must be >= 0");
  if (!(timeout > 0)) throw std::invalid_argument("mission: timeout must be > 0");
  if (!(goal_tolerance > 0)) throw std::invalid_argument("mission: goal_tolerance must be > 0");
  if (!(audit_step > 0)) throw std::invalid_argument("mission: audit_step must be > 0");
}

std::string_view to_string(TriggerReason r) {
  switch (r) {
    case TriggerReason::Initial: return "initial";
    case TriggerReason::Collision: return "collision";
    case TriggerReason::Periodic: return "periodic";
  }
  return "unknown";
}

MissionState make_mission_state(const VoxelGrid& true_world, const State& start, const MissionConfig& mcfg,
                                const PlannerConfig& pcfg) {
  MissionState m;
  m.true_world = true_world;
  m.known_world = VoxelGrid(true_world.origin(), true_world.resolution(), true_world.dims(),
                            true_world.inflation_radius());
  m.field = DistanceField::build(m.known_world, pcfg.field_cap());
  m.robot = start;
  m.sensing_radius = mcfg.sensing_radius;
  m.replan_period = mcfg.replan_period;
  return m;
}

std::vector<Vec3i> sense(MissionState& m) {
  const VoxelGrid& truth = m.true_world;
  const double res = truth.resolution();
  const Vec3 rel = (m.robot.position - truth.origin()) / res;
  const double rv = m.sensing_radius / res;
  Vec3i lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor(rel[a] - rv - 1.0)));
    hi[a] = std::min(truth.dims()[a] - 1, static_cast<int>(std::ceil(rel[a] + rv + 1.0)));
  }
  const double r2 = m.sensing_radius * m.sensing_radius;
  std::vector<Vec3i> changed;
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Vec3i idx(x, y, z);
        if (!truth.raw_occupied(idx) || m.known_world.raw_occupied(idx)) continue;
        if ((truth.index_to_world(idx) - m.robot.position).squaredNorm() > r2) continue;
        m.known_world.add_obstacle(idx);
        changed.push_back(idx);
      }
  if (!changed.empty()) {
    Vec3i clo = changed.front(), chi = changed.front();
    for (const auto& c : changed) {
      clo = clo.cwiseMin(c);
      chi = chi.cwiseMax(c);
    }
    const int pad = static_cast<int>(std::ceil(truth.inflation_radius() / res)) + 1;
    m.field.update_window(m.known_world, clo.array() - pad, chi.array() + pad);
  }
  return changed;
}

std::optional<TriggerReason> check_trigger(const MissionState& m, const std::vector<Vec3i>& newly_revealed,
                                           double check_step) {
  if (m.trajectory && first_collision(*m.trajectory, m.known_world, check_step, m.clock))
    return TriggerReason::Collision;
  const bool stale = !m.trajectory || !m.reaches_goal || m.map_changed || !newly_revealed.empty();
  if (stale && m.clock - m.last_plan_time >= m.replan_period - 1e-9) return TriggerReason::Periodic;
  return std::nullopt;
}

PlanResult plan_local(const MissionState& m, const State& from, double t0, const State& goal,
                      const PlannerConfig& cfg) {
  const SearchHorizon horizon{from.position, m.sensing_radius};
  return plan(from, goal, m.known_world, m.field, cfg, &horizon, t0);
}

namespace {

// Perfect tracking; past the end of a trajectory the robot hovers at its end point.
State state_on(const std::optional<Trajectory>& traj, const State& hold, double t) {
  if (!traj) return {hold.position, Vec3::Zero()};
  if (t >= traj->t_end()) return {traj->eval(traj->t_end()), Vec3::Zero()};
  const double tc = std::max(t, traj->t_begin());
  return {traj->eval(tc), traj->eval(tc, 1)};
}

void add_box(VoxelGrid& g, const Box& box) {
  const double res = g.resolution();
  Vec3i lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((box.min[a] - g.origin()[a]) / res)));
    hi[a] = std::min(g.dims()[a] - 1, static_cast<int>(std::ceil((box.max[a] - g.origin()[a]) / res)) - 1);
  }
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) g.add_obstacle(Vec3i(x, y, z));
}

}  // namespace

MissionLog run_mission(const VoxelGrid& true_world, const State& start, const State& goal,
                       const PlannerConfig& pcfg, const MissionConfig& mcfg,
                       const std::vector<ScriptedReveal>& reveals) {
  pcfg.validate();
  mcfg.validate();
  MissionLog log;
  MissionState m = make_mission_state(true_world, start, mcfg, pcfg);
  std::vector<bool> revealed(reveals.size(), false);
  auto apply_reveals = [&] {
    for (std::size_t i = 0; i < reveals.size(); ++i)
      if (!revealed[i] && reveals[i].time <= m.clock + 1e-12) {
        add_box(m.true_world, reveals[i].box);
        revealed[i] = true;
      }
  };
  if (!m.true_world.is_free(start.position)) {
    log.outcome = "start-blocked";
    return log;
  }

  State hold = start;
  std::optional<Trajectory> pending;
  double pending_time = 0.0;
  int failures = 0;

  auto active_state = [&](double t) {
    if (pending && t >= pending_time) return state_on(pending, hold, t);
    return state_on(m.trajectory, hold, t);
  };

  auto replan = [&](TriggerReason reason) {
    const double switch_time = reason == TriggerReason::Initial ? m.clock : m.clock + mcfg.commit_latency;
    const State from = reason == TriggerReason::Initial ? start : active_state(switch_time);
    PlanResult r = plan_local(m, from, switch_time, goal, pcfg);
    ReplanRecord rec;
    rec.time = m.clock;
    rec.switch_time = switch_time;
    rec.reason = reason;
    rec.status = r.status;
    rec.timings = r.timings;
    rec.adopted = r.usable();
    if (rec.adopted) {
      const Trajectory& next = *r.final;
      rec.position_jump = (next.eval(next.t_begin()) - from.position).norm();
      rec.velocity_jump = (next.eval(next.t_begin(), 1) - from.velocity).norm();
      log.max_position_jump = std::max(log.max_position_jump, rec.position_jump);
      rec.trajectory = next;
      if (switch_time <= m.clock) {
        m.trajectory = next;
      } else {
        pending = next;
        pending_time = switch_time;
      }
      m.last_plan_time = m.clock;
      m.reaches_goal = !r.search.reached_horizon;
      m.map_changed = false;
      failures = 0;
    } else {
      ++failures;
      if (reason == TriggerReason::Periodic) m.last_plan_time = m.clock;
      if (reason == TriggerReason::Collision) {
        // No way around the obstacle: stop where we are.
        hold = {m.robot.position, Vec3::Zero()};
        m.trajectory.reset();
        m.reaches_goal = false;
        m.last_plan_time = m.clock;
      }
    }
    if (reason == TriggerReason::Collision) ++log.collision_triggers;
    if (reason == TriggerReason::Periodic) ++log.periodic_triggers;
    log.replans.push_back(std::move(rec));
  };

  apply_reveals();
  sense(m);
  replan(TriggerReason::Initial);
  log.executed.push_back({0.0, start});

  while (true) {
    if ((m.robot.position - goal.position).norm() <= mcfg.goal_tolerance) {
      log.success = true;
      log.outcome = "goal-reached";
      break;
    }
    if (m.clock >= mcfg.timeout - 1e-9) {
      log.outcome = "timeout";
      break;
    }
    const bool stationary = !m.trajectory || m.clock >= m.trajectory->t_end();
    if (failures >= mcfg.max_failed_replans && stationary && !pending) {
      log.outcome = "trapped";
      break;
    }

    // Advance and audit against the ground truth.
    const double t_next = m.clock + mcfg.tick;
    const long steps = static_cast<long>(std::ceil(mcfg.tick / mcfg.audit_step - 1e-9));
    for (long k = 1; k <= steps; ++k) {
      const double t = std::min(m.clock + k * mcfg.audit_step, t_next);
      if (!m.true_world.is_free(active_state(t).position)) ++log.collisions;
    }
    m.clock = t_next;
    if (pending && m.clock >= pending_time - 1e-12) {
      m.trajectory = pending;
      pending.reset();
    }
    m.robot = state_on(m.trajectory, hold, m.clock);
    if (!m.trajectory || m.clock >= m.trajectory->t_end()) hold = m.robot;
    log.executed.push_back({m.clock, m.robot});

    apply_reveals();
    const auto changed = sense(m);
    if (!changed.empty()) m.map_changed = true;
    if (pending) continue;
    if (auto reason = check_trigger(m, changed, pcfg.collision_step)) replan(*reason);
  }
  log.duration = m.clock;
  return log;
}

void write_mission_json(std::ostream& os, const MissionLog& log) {
  Json j;
  j["success"] = log.success;
  j["outcome"] = log.outcome;
  j["duration"] = log.duration;
  j["collisions"] = log.collisions;
  j["max_position_jump"] = log.max_position_jump;
  j["collision_triggers"] = log.collision_triggers;
  j["periodic_triggers"] = log.periodic_triggers;
  Json replans = Json::array();
  for (const auto& r : log.replans) {
    Json e;
    e["time"] = r.time;
    e["switch_time"] = r.switch_time;
    e["reason"] = std::string(to_string(r.reason));
    e["status"] = std::string(to_string(r.status));
    e["adopted"] = r.adopted;
    e["timings"] = {{"search", r.timings.search},
                    {"fit", r.timings.fit},
                    {"optimize", r.timings.optimize},
                    {"adjust", r.timings.adjust},
                    {"total", r.timings.total}};
    e["position_jump"] = r.position_jump;
    e["velocity_jump"] = r.velocity_jump;
    if (r.trajectory) e["trajectory"] = trajectory_to_json(*r.trajectory);
    replans.push_back(e);
  }
  j["replans"] = replans;
  os << j.dump(2) << '\n';
}

void write_executed_csv(std::ostream& os, const MissionLog& log) { write_states_csv(os, log.executed); }

}  // namespace kinoplan
