#include "kinoplan/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <Eigen/QR>
#include <stdexcept>

namespace kinoplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Moves the leading control points so position, velocity and acceleration
// at t_begin match `target` (rows: order 0..2, columns: axes).
Trajectory anchor_start(const Trajectory& traj, const Eigen::Matrix3d& target) {
  const int p = traj.degree();
  const int rows = std::min(p, 2) + 1;
  const double tb = traj.t_begin();
  Eigen::MatrixXd basis(rows, p);
  for (int j = 0; j < p; ++j) {
    Trajectory::Points unit = Trajectory::Points::Zero(3, traj.size());
    unit.col(j).setOnes();
    const Trajectory b = traj.with_control_points(unit);
    for (int r = 0; r < rows; ++r) basis(r, j) = b.eval(tb, r).x();
  }
  Eigen::MatrixXd residual(rows, 3);
  for (int r = 0; r < rows; ++r) residual.row(r) = (target.row(r).transpose() - traj.eval(tb, r)).transpose();
  const Eigen::MatrixXd delta = basis.completeOrthogonalDecomposition().solve(residual);
  Trajectory::Points q = traj.control_points();
  for (int j = 0; j < p; ++j) q.col(j) += delta.row(j).transpose();
  return traj.with_control_points(std::move(q));
}

Eigen::Matrix3d start_derivatives(const Trajectory& traj) {
  Eigen::Matrix3d d;
  for (int r = 0; r < 3; ++r) d.row(r) = traj.eval(traj.t_begin(), r).transpose();
  return d;
}

// Time adjustment that keeps the start position and velocity.
AdjustResult adjust_anchored(const Trajectory& traj, const TimeAdjustConfig& cfg) {
  constexpr int kMaxPasses = 8;
  const Eigen::Matrix3d target = start_derivatives(traj);
  AdjustResult out = adjust(traj, cfg);
  int rounds = out.rounds;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const Eigen::Matrix3d now = start_derivatives(out.trajectory);
    if ((now.topRows(2) - target.topRows(2)).cwiseAbs().maxCoeff() <= 1e-12) break;
    Eigen::Matrix3d goal = target;
    goal.row(2) = now.row(2);
    const Trajectory anchored = anchor_start(out.trajectory, goal);
    if (find_infeasible(anchored, cfg).empty()) {
      out.trajectory = anchored;
      out.feasible = true;
      break;
    }
    auto stretches = std::move(out.stretches);
    out = adjust(anchored, cfg);
    stretches.insert(stretches.end(), out.stretches.begin(), out.stretches.end());
    out.stretches = std::move(stretches);
    rounds += out.rounds;
  }
  out.rounds = rounds;
  return out;
}

}  // namespace

void PlannerConfig::validate() const {
  search.validate();
  optimizer.validate();
  time_adjust.validate();
  if (!(sample_dt > 0)) throw std::invalid_argument("planner: sample_dt must be > 0");
  if (!(field_cap_factor > 1)) throw std::invalid_argument("planner: field_cap_factor must be > 1");
  if (!(collision_step > 0)) throw std::invalid_argument("planner: collision_step must be > 0");
}

std::string_view to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Success: return "success";
    case PlanStatus::SearchFailed: return "search-failed";
    case PlanStatus::OptimizerFallback: return "optimizer-fallback";
    case PlanStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

std::optional<double> first_collision(const Trajectory& traj, const VoxelGrid& map, double step, double t_from) {
  const double t_begin = std::max(traj.t_begin(), t_from);
  const double t_end = traj.t_end();
  if (t_begin > t_end) return std::nullopt;
  const long n = static_cast<long>(std::ceil((t_end - t_begin) / step));
  for (long k = 0; k <= n; ++k) {
    const double t = std::min(t_begin + k * step, t_end);
    if (!map.is_free(traj.eval(t))) return t;
  }
  return std::nullopt;
}

PlanResult plan(const State& start, const State& goal, const VoxelGrid& map, const DistanceField& field,
                const PlannerConfig& cfg, const SearchHorizon* horizon, double t0) {
  cfg.validate();
  PlanResult r;
  const auto t_all = Clock::now();

  auto t = Clock::now();
  r.search = search(start, goal, map, cfg.search, horizon);
  r.timings.search = seconds_since(t);
  if (!r.search.success()) {
    r.status = PlanStatus::SearchFailed;
    r.timings.total = seconds_since(t_all);
    return r;
  }

  t = Clock::now();
  const double duration = r.search.duration();
  const int k = std::max(3, static_cast<int>(std::ceil(duration / cfg.sample_dt - 1e-9)));
  const double dt = duration > 0.0 ? duration / k : cfg.sample_dt;
  const State end = r.search.end_state();
  r.samples.reserve(k + 1);
  for (int i = 0; i <= k; ++i) {
    const double ti = i == k ? duration : std::min(i * dt, duration);
    r.samples.push_back({t0 + i * dt, duration > 0.0 ? r.search.at(ti) : start});
  }
  r.samples.front().state = start;
  r.samples.back().state.position = end.position;
  r.initial = fit_from_samples(r.samples, dt, start, end);
  r.timings.fit = seconds_since(t);

  t = Clock::now();
  r.optimization = optimize(*r.initial, field, cfg.optimizer);
  r.optimized = r.optimization.trajectory;
  r.hulls = check_hull_safety(*r.optimized, field);
  r.hull_safe = all_safe(r.hulls);
  r.timings.optimize = seconds_since(t);

  t = Clock::now();
  auto finish = [&](const Trajectory& candidate) {
    r.adjustment = adjust_anchored(candidate, cfg.time_adjust);
    r.final = r.adjustment.trajectory;
    r.collision_free = !first_collision(*r.final, map, cfg.collision_step).has_value();
  };
  finish(*r.optimized);
  if (!r.collision_free) {
    r.fallback = true;
    finish(*r.initial);
  }
  r.timings.adjust = seconds_since(t);

  if (!r.adjustment.feasible)
    r.status = PlanStatus::Infeasible;
  else if (r.fallback)
    r.status = PlanStatus::OptimizerFallback;
  else
    r.status = PlanStatus::Success;
  r.timings.total = seconds_since(t_all);
  return r;
}

}  // namespace kinoplan
