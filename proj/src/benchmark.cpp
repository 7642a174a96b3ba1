#include "kinoplan/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

namespace kinoplan {

std::pair<State, State> bench_endpoints(const RunConfig& cfg) {
  const Vec3 center = cfg.world.origin + 0.5 * cfg.world.extent;
  const Vec3 half(0.5 * cfg.bench.separation, 0.0, 0.0);
  Vec3 s = center - half, g = center + half;
  s.z() = g.z() = cfg.world.origin.z() + cfg.bench.altitude;
  return {State{s, Vec3::Zero()}, State{g, Vec3::Zero()}};
}

WorldSpec bench_world(const RunConfig& cfg, std::uint64_t seed) {
  WorldSpec w = cfg.world;
  w.seed = seed;
  const auto [s, g] = bench_endpoints(cfg);
  const double m = cfg.bench.free_margin;
  w.free_regions.push_back(Box{s.position.array() - m, s.position.array() + m});
  w.free_regions.push_back(Box{g.position.array() - m, g.position.array() + m});
  return w;
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  s.max = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    sum += x;
    s.max = std::max(s.max, x);
  }
  s.mean = sum / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.std = xs.size() > 1 ? std::sqrt(var / (xs.size() - 1)) : 0.0;
  return s;
}

namespace {

double normalized_convergence(const PlanResult& r, const DistanceField& field, const RunConfig& cfg) {
  const auto& trace = r.optimization.trace;
  if (cfg.bench.reference_iters <= 0 || trace.empty()) return std::numeric_limits<double>::quiet_NaN();
  OptimizerConfig ref = cfg.planner.optimizer;
  ref.max_iters = cfg.bench.reference_iters;
  ref.grad_tol = 0.0;
  ref.budget = 0.0;
  const OptimizeResult long_run = optimize(*r.initial, field, ref);
  double f_star = std::numeric_limits<double>::infinity();
  for (const auto& e : long_run.trace) f_star = std::min(f_star, e.f_total);
  for (const auto& e : trace) f_star = std::min(f_star, e.f_total);
  const double f0 = trace.front().f_total;
  if (!(f0 - f_star > 1e-12 * std::max(1.0, std::abs(f0)))) return 0.0;
  double best = 1.0;
  for (const auto& e : trace)
    if (e.iteration <= cfg.bench.convergence_window) best = std::min(best, (e.f_total - f_star) / (f0 - f_star));
  return best;
}

template <class Result, class Fn>
std::vector<Result> for_seeds(const std::vector<std::uint64_t>& seeds, int threads, Fn fn) {
  std::vector<Result> out(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) out[i] = fn(seeds[i]);
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(seeds.size())));
  if (n == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace

SeedStats run_seed(const RunConfig& cfg, std::uint64_t seed) {
  SeedStats s;
  s.seed = seed;
  VoxelGrid map;
  try {
    map = generate_world(bench_world(cfg, seed), cfg.resolution);
  } catch (const std::exception& e) {
    s.world_ok = false;
    s.error = e.what();
    return s;
  }
  const DistanceField field = DistanceField::build(map, cfg.planner.field_cap());
  const auto [start, goal] = bench_endpoints(cfg);
  const PlanResult r = plan(start, goal, map, field, cfg.planner);
  s.status = r.status;
  s.search_status = r.search.status;
  s.expansions = r.search.expansions;
  s.timings = r.timings;
  if (!r.search.success()) return s;
  s.duration = r.search.duration();
  s.control_cost = r.search.control_cost();
  s.jerk_initial = jerk_integral(*r.initial);
  s.jerk_optimized = jerk_integral(*r.optimized);
  s.optimizer_iterations = r.optimization.iterations;
  s.normalized_cost = normalized_convergence(r, field, cfg);
  s.adjust_rounds = r.adjustment.rounds;
  s.feasible = r.adjustment.feasible;
  s.fallback = r.fallback;
  s.hull_safe = r.hull_safe;
  s.collision_free = r.collision_free;
  s.final_duration = r.final ? r.final->duration() : 0.0;
  return s;
}

BenchmarkReport run_benchmark(const RunConfig& cfg) {
  cfg.validate();
  BenchmarkReport rep;
  rep.seeds = for_seeds<SeedStats>(cfg.bench.seeds(), cfg.bench.threads,
                                   [&](std::uint64_t seed) { return run_seed(cfg, seed); });
  std::vector<double> t, d, c, j0, j, rounds, topt;
  int ok = 0, improved = 0, converged = 0;
  for (const auto& s : rep.seeds) {
    if (!s.search_success()) continue;
    ++ok;
    t.push_back(s.timings.search);
    d.push_back(s.duration);
    c.push_back(s.control_cost);
    j0.push_back(s.jerk_initial);
    j.push_back(s.jerk_optimized);
    rounds.push_back(s.adjust_rounds);
    topt.push_back(s.timings.optimize);
    improved += s.jerk_optimized <= s.jerk_initial;
    converged += s.normalized_cost < 0.1;
    rep.fallbacks += s.fallback;
    rep.infeasible += !s.feasible;
  }
  rep.success_rate = static_cast<double>(ok) / rep.seeds.size();
  rep.search_time = summarize(t);
  rep.duration = summarize(d);
  rep.control_cost = summarize(c);
  rep.jerk_initial = summarize(j0);
  rep.jerk_optimized = summarize(j);
  rep.adjust_rounds = summarize(rounds);
  rep.optimize_time = summarize(topt);
  if (ok > 0) {
    rep.jerk_improved_rate = static_cast<double>(improved) / ok;
    rep.converged_rate = static_cast<double>(converged) / ok;
  }
  return rep;
}

void write_seed_csv(std::ostream& os, const BenchmarkReport& r) {
  os << "seed,world_ok,status,search_status,expansions,duration,control_cost,jerk_initial,jerk_optimized,"
        "optimizer_iterations,normalized_cost,adjust_rounds,feasible,fallback,hull_safe,collision_free,"
        "final_duration\n";
  os.precision(12);
  for (const auto& s : r.seeds)
    os << s.seed << ',' << s.world_ok << ',' << to_string(s.status) << ',' << to_string(s.search_status) << ','
       << s.expansions << ',' << s.duration << ',' << s.control_cost << ',' << s.jerk_initial << ','
       << s.jerk_optimized << ',' << s.optimizer_iterations << ',' << s.normalized_cost << ',' << s.adjust_rounds
       << ',' << s.feasible << ',' << s.fallback << ',' << s.hull_safe << ',' << s.collision_free << ','
       << s.final_duration << '\n';
}

void write_timing_csv(std::ostream& os, const BenchmarkReport& r) {
  os << "seed,search,fit,optimize,adjust,total\n";
  os.precision(6);
  for (const auto& s : r.seeds)
    os << s.seed << ',' << s.timings.search << ',' << s.timings.fit << ',' << s.timings.optimize << ','
       << s.timings.adjust << ',' << s.timings.total << '\n';
}

void write_summary_csv(std::ostream& os, const BenchmarkReport& r) {
  os << "metric,count,mean,max,std\n";
  os.precision(10);
  auto row = [&](const char* name, const Summary& s) {
    os << name << ',' << s.count << ',' << s.mean << ',' << s.max << ',' << s.std << '\n';
  };
  row("search_time", r.search_time);
  row("duration", r.duration);
  row("control_cost", r.control_cost);
  row("jerk_initial", r.jerk_initial);
  row("jerk_optimized", r.jerk_optimized);
  row("adjust_rounds", r.adjust_rounds);
  row("optimize_time", r.optimize_time);
  os << "success_rate," << r.seeds.size() << ',' << r.success_rate << ",,\n";
  os << "jerk_improved_rate,," << r.jerk_improved_rate << ",,\n";
  os << "converged_rate,," << r.converged_rate << ",,\n";
}

void print_summary(std::ostream& os, const BenchmarkReport& r) {
  os.precision(4);
  os << "seeds " << r.seeds.size() << "  success " << 100.0 * r.success_rate << "%\n";
  auto line = [&](const char* name, const Summary& s, const char* unit) {
    os << "  " << name << "  mean " << s.mean << "  max " << s.max << "  std " << s.std << ' ' << unit << '\n';
  };
  line("search time   ", r.search_time, "s");
  line("duration      ", r.duration, "s");
  line("control cost  ", r.control_cost, "m^2/s^3");
  line("jerk (initial)", r.jerk_initial, "m^2/s^5");
  line("jerk (optim.) ", r.jerk_optimized, "m^2/s^5");
  line("adjust rounds ", r.adjust_rounds, "");
  os << "  jerk improved " << 100.0 * r.jerk_improved_rate << "%  converged " << 100.0 * r.converged_rate
     << "%  fallbacks " << r.fallbacks << "  infeasible " << r.infeasible << '\n';
}

MissionStats run_mission_seed(const RunConfig& cfg, std::uint64_t seed) {
  MissionStats s;
  s.seed = seed;
  VoxelGrid world;
  try {
    world = generate_world(bench_world(cfg, seed), cfg.resolution);
  } catch (const std::exception& e) {
    s.world_ok = false;
    s.outcome = e.what();
    return s;
  }
  const auto [start, goal] = bench_endpoints(cfg);
  const MissionLog log = run_mission(world, start, goal, cfg.planner, cfg.mission);
  s.outcome = log.outcome;
  s.success = log.success;
  s.duration = log.duration;
  s.collisions = log.collisions;
  s.max_position_jump = log.max_position_jump;
  s.replans = static_cast<int>(log.replans.size());
  s.collision_triggers = log.collision_triggers;
  s.periodic_triggers = log.periodic_triggers;
  return s;
}

std::vector<MissionStats> run_mission_benchmark(const RunConfig& cfg) {
  cfg.validate();
  return for_seeds<MissionStats>(cfg.bench.seeds(), cfg.bench.threads,
                                 [&](std::uint64_t seed) { return run_mission_seed(cfg, seed); });
}

void write_mission_csv(std::ostream& os, const std::vector<MissionStats>& stats) {
  os << "seed,world_ok,outcome,success,duration,collisions,max_position_jump,replans,collision_triggers,"
        "periodic_triggers\n";
  os.precision(12);
  for (const auto& s : stats)
    os << s.seed << ',' << s.world_ok << ',' << s.outcome << ',' << s.success << ',' << s.duration << ','
       << s.collisions << ',' << s.max_position_jump << ',' << s.replans << ',' << s.collision_triggers << ','
       << s.periodic_triggers << '\n';
}

}  // namespace kinoplan
