#include "kinoplan/time_adjust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kinoplan {

namespace {

constexpr double kSlack = 1e-10;

double worst_axis(const Vec3& v) { return v.cwiseAbs().maxCoeff(); }

Trajectory stretch_spans(const Trajectory& traj, int lo, int hi, double mu, bool preserve_endpoints) {
  if (!(mu >= 1.0)) throw std::invalid_argument("stretch: scale must be >= 1");
  const auto& t = traj.knots();
  const int p = traj.degree();
  const int last_span = static_cast<int>(t.size()) - 2;
  lo = std::max(lo, 0);
  hi = std::min(hi, last_span);
  if (preserve_endpoints && p > 1) {
    const int head_hi = 2 * p - 2;
    const int tail_lo = last_span - 2 * p + 2;
    const int tail_hi = last_span - 1;
    const bool head = lo <= head_hi;
    const bool tail = hi >= tail_lo;
    if (head) {
      lo = std::min(lo, 1);
      hi = std::max(hi, head_hi);
    }
    if (tail) {
      lo = std::min(lo, tail_lo);
      hi = std::max(hi, tail_hi);
    }
  }
  if (mu == 1.0 || lo > hi) return traj;

  Trajectory::Knots out(t.size());
  out[0] = t[0];
  for (int m = 0; m <= last_span; ++m) {
    const double span = t[m + 1] - t[m];
    out[m + 1] = out[m] + (m >= lo && m <= hi ? mu * span : span);
  }
  // Keep the domain start where it was.
  out.array() += t[p] - out[p];
  return traj.with_knots(std::move(out));
}

}  // namespace

void TimeAdjustConfig::validate() const {
  if (!(v_max > 0) || !(a_max > 0)) throw std::invalid_argument("time_adjust: limits must be > 0");
  if (!(alpha_v > 1) || !(alpha_a > 1)) throw std::invalid_argument("time_adjust: alpha must be > 1");
  if (max_rounds < 0) throw std::invalid_argument("time_adjust: max_rounds must be >= 0");
}

Violations find_infeasible(const Trajectory& traj, const TimeAdjustConfig& cfg) {
  const auto d = derivative_control_points(traj);
  Violations out;
  for (Eigen::Index i = 0; i < d.velocity.cols(); ++i) {
    const double m = worst_axis(d.velocity.col(i));
    if (m > cfg.v_max * (1.0 + kSlack)) out.velocity.push_back({static_cast<int>(i), m});
  }
  for (Eigen::Index i = 0; i < d.acceleration.cols(); ++i) {
    const double m = worst_axis(d.acceleration.col(i));
    if (m > cfg.a_max * (1.0 + kSlack)) out.acceleration.push_back({static_cast<int>(i), m});
  }
  return out;
}

Trajectory stretch_for_velocity(const Trajectory& traj, int i, double mu, bool preserve_endpoints) {
  const int p = traj.degree();
  return stretch_spans(traj, i + 1, i + p, mu, preserve_endpoints);
}

Trajectory stretch_for_acceleration(const Trajectory& traj, int i, double mu, bool preserve_endpoints) {
  const int p = traj.degree();
  return stretch_spans(traj, i + 1, i + p + 1, mu, preserve_endpoints);
}

AdjustResult adjust(const Trajectory& traj, const TimeAdjustConfig& cfg) {
  cfg.validate();
  AdjustResult out;
  out.trajectory = traj;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    const Violations v = find_infeasible(out.trajectory, cfg);
    if (v.empty()) return out;
    ++out.rounds;

    for (const auto& viol : v.velocity) {
      const Vec3 before = derivative_control_points(out.trajectory).velocity.col(viol.index);
      const double vm = worst_axis(before);
      if (vm <= cfg.v_max * (1.0 + kSlack)) continue;
      const double mu = std::min(cfg.alpha_v, vm / cfg.v_max);
      out.trajectory = stretch_for_velocity(out.trajectory, viol.index, mu, cfg.preserve_endpoints);
      StretchRecord r;
      r.kind = StretchRecord::Kind::Velocity;
      r.round = round;
      r.index = viol.index;
      r.mu = mu;
      r.before = before;
      r.after = derivative_control_points(out.trajectory).velocity.col(viol.index);
      out.stretches.push_back(r);
    }
    for (const auto& viol : v.acceleration) {
      const Vec3 before = derivative_control_points(out.trajectory).acceleration.col(viol.index);
      const double am = worst_axis(before);
      if (am <= cfg.a_max * (1.0 + kSlack)) continue;
      const double mu = std::min(cfg.alpha_a, std::sqrt(am / cfg.a_max));
      out.trajectory = stretch_for_acceleration(out.trajectory, viol.index, mu, cfg.preserve_endpoints);
      StretchRecord r;
      r.kind = StretchRecord::Kind::Acceleration;
      r.round = round;
      r.index = viol.index;
      r.mu = mu;
      r.before = before;
      r.after = derivative_control_points(out.trajectory).acceleration.col(viol.index);
      out.stretches.push_back(r);
    }
  }
  out.feasible = find_infeasible(out.trajectory, cfg).empty();
  return out;
}

}  // namespace kinoplan
