#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "kinoplan/bspline.hpp"
#include "kinoplan/distance_field.hpp"
#include "kinoplan/kino_search.hpp"
#include "kinoplan/time_adjust.hpp"
#include "kinoplan/traj_opt.hpp"

namespace kinoplan {

struct PlannerConfig {
  SearchConfig search;
  OptimizerConfig optimizer;
  TimeAdjustConfig time_adjust;
  double sample_dt = 0.15;         ///< knot span of the initial fit (s)
  double field_cap_factor = 10.0;  ///< distance field cap as a multiple of d_thr
  double collision_step = 0.01;    ///< dense trajectory check step (s)

  double field_cap() const { return field_cap_factor * optimizer.d_thr; }
  void validate() const;
};

struct StageTimings {
  double search = 0.0;
  double fit = 0.0;
  double optimize = 0.0;
  double adjust = 0.0;
  double total = 0.0;
};

enum class PlanStatus { Success, SearchFailed, OptimizerFallback, Infeasible };
std::string_view to_string(PlanStatus s);

struct PlanResult {
  PlanStatus status = PlanStatus::SearchFailed;
  SearchResult search;
  std::vector<TimedState> samples;
  std::optional<Trajectory> initial;    ///< fitted to the searched path
  std::optional<Trajectory> optimized;  ///< optimizer output, even when not used
  std::optional<Trajectory> final;      ///< time-adjusted trajectory to execute
  OptimizeResult optimization;
  AdjustResult adjustment;
  std::vector<HullVerdict> hulls;       ///< certificate of the optimized trajectory
  bool hull_safe = false;
  bool fallback = false;                ///< the unoptimized fit was used
  bool collision_free = false;          ///< dense check of `final` against the map
  StageTimings timings;

  bool usable() const { return final.has_value() && collision_free; }
};

/// First time in [t_begin, t_end] (sampled every `step`) at which the
/// trajectory enters an occupied voxel of `map`, if any.
std::optional<double> first_collision(const Trajectory& traj, const VoxelGrid& map, double step,
                                      double t_from = -std::numeric_limits<double>::infinity());

/// Path search, spline fit, optimization and time adjustment. `t0` is the
/// time assigned to the start state.
PlanResult plan(const State& start, const State& goal, const VoxelGrid& map, const DistanceField& field,
                const PlannerConfig& cfg, const SearchHorizon* horizon = nullptr, double t0 = 0.0);

}  // namespace kinoplan
