#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kinoplan/config.hpp"

namespace kinoplan {

/// Start and goal of the benchmark instance described by `cfg.bench`.
std::pair<State, State> bench_endpoints(const RunConfig& cfg);
/// World spec for `seed`, with free boxes around the endpoints.
WorldSpec bench_world(const RunConfig& cfg, std::uint64_t seed);

struct SeedStats {
  std::uint64_t seed = 0;
  bool world_ok = true;
  std::string error;
  PlanStatus status = PlanStatus::SearchFailed;
  SearchStatus search_status = SearchStatus::OpenSetExhausted;
  int expansions = 0;
  double duration = 0.0;       ///< searched path (s)
  double control_cost = 0.0;   ///< integral of |u|^2 along the searched path
  double jerk_initial = 0.0;
  double jerk_optimized = 0.0;
  int optimizer_iterations = 0;
  /// min over the first `convergence_window` iterations of (f - f*) / (f_0 - f*); NaN when disabled.
  double normalized_cost = 0.0;
  int adjust_rounds = 0;
  bool feasible = false;
  bool fallback = false;
  bool hull_safe = false;
  bool collision_free = false;
  double final_duration = 0.0;
  StageTimings timings;

  bool search_success() const { return world_ok && search_status == SearchStatus::Success; }
};

struct Summary {
  int count = 0;
  double mean = 0.0, max = 0.0, std = 0.0;
};
Summary summarize(const std::vector<double>& xs);

struct BenchmarkReport {
  std::vector<SeedStats> seeds;
  double success_rate = 0.0;  ///< search successes over all seeds
  Summary search_time, duration, control_cost, jerk_initial, jerk_optimized, adjust_rounds, optimize_time;
  double jerk_improved_rate = 0.0;  ///< optimized <= initial jerk, over successful seeds
  double converged_rate = 0.0;      ///< normalized cost < 0.1, over successful seeds
  int fallbacks = 0;
  int infeasible = 0;
};

SeedStats run_seed(const RunConfig& cfg, std::uint64_t seed);
/// Runs every seed of `cfg.bench`, on `cfg.bench.threads` workers; results are in seed order.
BenchmarkReport run_benchmark(const RunConfig& cfg);

/// Per-seed results without wall-clock columns; identical across runs.
void write_seed_csv(std::ostream& os, const BenchmarkReport& r);
void write_timing_csv(std::ostream& os, const BenchmarkReport& r);
void write_summary_csv(std::ostream& os, const BenchmarkReport& r);
void print_summary(std::ostream& os, const BenchmarkReport& r);

struct MissionStats {
  std::uint64_t seed = 0;
  bool world_ok = true;
  std::string outcome;
  bool success = false;
  double duration = 0.0;
  int collisions = 0;
  double max_position_jump = 0.0;
  int replans = 0;
  int collision_triggers = 0;
  int periodic_triggers = 0;
};

MissionStats run_mission_seed(const RunConfig& cfg, std::uint64_t seed);
std::vector<MissionStats> run_mission_benchmark(const RunConfig& cfg);
void write_mission_csv(std::ostream& os, const std::vector<MissionStats>& stats);

}  // namespace kinoplan
