#pragma once

#include <vector>

#include "kinoplan/bspline.hpp"

namespace kinoplan {

struct TimeAdjustConfig {
  double v_max = 3.0;
  double a_max = 2.0;
  double alpha_v = 1.1;
  double alpha_a = 1.1;
  int max_rounds = 50;
  /// Widen stretches that touch the first or last 2p-2 spans to that whole
  /// group, so the start and end positions stay fixed.
  bool preserve_endpoints = true;

  void validate() const;
};

struct Violation {
  int index = 0;
  double magnitude = 0.0;  ///< largest per-axis absolute value
};

struct Violations {
  std::vector<Violation> velocity;
  std::vector<Violation> acceleration;
  bool empty() const { return velocity.empty() && acceleration.empty(); }
};

/// Velocity and acceleration control points exceeding the limits on some axis.
Violations find_infeasible(const Trajectory& traj, const TimeAdjustConfig& cfg);

/// Scales spans [t_m, t_{m+1}] for m in i+1..i+p by mu; later knots shift.
/// The domain start t_p is kept.
Trajectory stretch_for_velocity(const Trajectory& traj, int i, double mu, bool preserve_endpoints = false);
/// Same for m in i+1..i+p+1.
Trajectory stretch_for_acceleration(const Trajectory& traj, int i, double mu, bool preserve_endpoints = false);

struct StretchRecord {
  enum class Kind { Velocity, Acceleration } kind = Kind::Velocity;
  int round = 0;
  int index = 0;
  double mu = 1.0;
  Vec3 before = Vec3::Zero();  ///< derivative control point before the stretch
  Vec3 after = Vec3::Zero();
};

struct AdjustResult {
  Trajectory trajectory;
  int rounds = 0;
  bool feasible = true;
  std::vector<StretchRecord> stretches;
};

/// Iterative time adjustment: repeatedly stretches the spans governing each
/// violating derivative control point by at most alpha until all are within
/// limits or max_rounds is reached.
AdjustResult adjust(const Trajectory& traj, const TimeAdjustConfig& cfg);

}  // namespace kinoplan
