#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "kinoplan/types.hpp"
#include "kinoplan/voxel_map.hpp"

namespace kinoplan {

struct SearchConfig {
  double u_max = 2.0;  ///< input bound per axis (m/s^2)
  double v_max = 3.0;  ///< velocity bound per axis (m/s)
  double a_max = 2.0;  ///< acceleration bound used by the analytic expansion check
  int r = 2;           ///< input levels per half axis
  double tau = 0.5;    ///< primitive duration (s)
  double rho = 5.0;    ///< time weight of the control-effort cost
  double goal_tolerance = 0.0;   ///< metres; <= 0 selects 1.5 * resolution
  double check_step = 0.0;       ///< seconds; <= 0 selects min(tau/10, res/v_max)
  int max_expansions = 300000;
  double prune_resolution = 0.0; ///< voxel size for pruning; <= 0 uses the map's
  bool prune_siblings = true;    ///< keep only the best primitive per end voxel
  bool analytic_expansion = true;

  double effective_check_step(double resolution) const;
  double effective_goal_tolerance(double resolution) const;
  void validate() const;
};

/// Closed-form double-integrator response to a constant input.
State state_transition(const State& x0, const Vec3& u, double t);

struct MotionPrimitive {
  State start;
  Vec3 input = Vec3::Zero();
  double duration = 0.0;
  State end;
  double edge_cost = 0.0;  ///< (|u|^2 + rho) * duration

  State at(double t) const { return state_transition(start, input, t); }
};

/// The (2r+1)^3 constant-input primitives leaving `from`.
std::vector<MotionPrimitive> expand(const State& from, const SearchConfig& cfg);
void expand(const State& from, const SearchConfig& cfg, std::vector<MotionPrimitive>& out);

struct HeuristicValue {
  double cost = 0.0;  ///< min over T of the boundary-value cost
  double time = 0.0;  ///< minimizing duration
  bool fallback = false;  ///< no positive stationary point; scanned instead
};

/// Total cost rho*T + integral |u|^2 of the optimal fixed-duration
/// double-integrator connection between `from` and `to`.
double obvp_cost(const State& from, const State& to, double duration, double rho);

/// Minimum of obvp_cost over T > 0, through the real roots of dC/dT.
HeuristicValue heuristic(const State& from, const State& to, double rho);

/// Per-axis cubic p(t) = p0 + v0 t + beta t^2/2 + alpha t^3/6.
struct CubicConnection {
  State start;
  Vec3 alpha = Vec3::Zero();
  Vec3 beta = Vec3::Zero();
  double duration = 0.0;

  static CubicConnection solve(const State& from, const State& to, double duration);
  State at(double t) const;
  Vec3 acceleration(double t) const { return beta + alpha * t; }
  /// integral of |u|^2 over the duration.
  double control_cost() const;
};

/// Tries the closed-form connection to the goal; returns it only if every
/// sample is free and within the velocity/acceleration bounds.
std::optional<CubicConnection> analytic_expand(const State& from, const State& goal,
                                               const VoxelGrid& map, const SearchConfig& cfg);

/// Samples at the check step plus the endpoint are free and within v_max.
bool check_feasible(const MotionPrimitive& prim, const VoxelGrid& map, const SearchConfig& cfg);

/// Optional receding-horizon limit: nodes ending outside the sphere stop the
/// search, and the chain is cut back to the last node inside it.
struct SearchHorizon {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

enum class SearchStatus { Success, StartInCollision, OpenSetExhausted, MaxExpansions };
std::string_view to_string(SearchStatus s);

struct SearchResult {
  SearchStatus status = SearchStatus::OpenSetExhausted;
  State start;
  std::vector<MotionPrimitive> primitives;
  std::optional<CubicConnection> tail;
  double g_cost = 0.0;      ///< sum of primitive edge costs
  double total_cost = 0.0;  ///< g_cost plus the tail's cost
  int expansions = 0;
  double wall_time = 0.0;
  bool reached_horizon = false;

  bool success() const { return status == SearchStatus::Success; }
  double duration() const;
  /// integral of |u|^2 dt over primitives and tail.
  double control_cost() const;
  State end_state() const;
  State at(double t) const;
};

SearchResult search(const State& start, const State& goal, const VoxelGrid& map,
                    const SearchConfig& cfg, const SearchHorizon* horizon = nullptr);

/// Samples the returned chain at uniform `dt` from 0; the last sample is the
/// exact end state even when the duration is not a multiple of dt.
std::vector<TimedState> retrieve_path(const SearchResult& result, double dt);

}  // namespace kinoplan
