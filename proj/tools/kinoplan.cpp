#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "kinoplan/benchmark.hpp"
#include "kinoplan/config.hpp"
#include "kinoplan/io.hpp"
#include "kinoplan/pipeline.hpp"
#include "kinoplan/replan.hpp"

namespace fs = std::filesystem;
using namespace kinoplan;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kSearchFailed = 2, kFallback = 3, kInfeasible = 4, kMissionFailed = 5 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

RunConfig resolve(const Globals& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  for (const auto& o : g.overrides) apply_override(cfg, o);
  if (!g.out.empty()) cfg.out_dir = g.out;
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

template <class F> void write_file(const std::string& path, F&& fill) {
  std::ostringstream os;
  fill(os);
  write_text_file(path, os.str());
}

void write_trajectory(const RunConfig& cfg, const std::string& stem, const Trajectory& t) {
  write_text_file(out_path(cfg, stem + ".json"), trajectory_to_json(t).dump(2) + "\n");
  write_file(out_path(cfg, stem + ".csv"), [&](std::ostream& os) { write_trajectory_csv(os, t, 0.01); });
}

Vec3 to_vec(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

int cmd_gen(RunConfig cfg, const Globals& g, const std::string& output) {
  if (g.seed) cfg.world.seed = *g.seed;
  cfg.validate();
  const VoxelGrid map = generate_world(cfg.world, cfg.resolution);
  const std::string path = output.empty() ? out_path(cfg, "map.txt") : output;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  save_map(path, map);
  const auto total = static_cast<double>(map.dims().prod());
  std::cout << "wrote " << path << ": dims " << map.dims().transpose() << ", occupied " << map.raw_count() << " ("
            << 100.0 * map.raw_count() / total << "%), inflated " << map.inflated_count() << " ("
            << 100.0 * map.inflated_count() / total << "%)\n";
  return kOk;
}

int cmd_plan(RunConfig cfg, const Globals& g, const std::string& map_path, const std::vector<double>& start_v,
             const std::vector<double>& goal_v) {
  cfg.validate();
  auto [start, goal] = bench_endpoints(cfg);
  if (!start_v.empty()) start.position = to_vec(start_v);
  if (!goal_v.empty()) goal.position = to_vec(goal_v);
  VoxelGrid map;
  if (!map_path.empty()) {
    map = load_map(map_path);
  } else {
    WorldSpec w = cfg.world;
    w.seed = g.seed.value_or(cfg.world.seed);
    const double m = cfg.bench.free_margin;
    for (const Vec3& p : {start.position, goal.position}) w.free_regions.push_back(Box{p.array() - m, p.array() + m});
    map = generate_world(w, cfg.resolution);
  }
  const DistanceField field = DistanceField::build(map, cfg.planner.field_cap());
  const PlanResult r = plan(start, goal, map, field, cfg.planner);

  write_text_file(out_path(cfg, "search.json"), search_result_to_json(r.search).dump(2) + "\n");
  if (r.search.success())
    write_file(out_path(cfg, "path.csv"),
               [&](std::ostream& os) { write_states_csv(os, retrieve_path(r.search, cfg.planner.sample_dt)); });
  if (r.initial) write_trajectory(cfg, "initial", *r.initial);
  if (r.optimized) write_trajectory(cfg, "optimized", *r.optimized);
  if (r.final) write_trajectory(cfg, "final", *r.final);
  if (!r.optimization.trace.empty())
    write_file(out_path(cfg, "trace.csv"), [&](std::ostream& os) { write_trace_csv(os, r.optimization.trace); });
  Json report;
  report["status"] = std::string(to_string(r.status));
  report["search_status"] = std::string(to_string(r.search.status));
  report["timings"] = {{"search", r.timings.search},   {"fit", r.timings.fit},
                       {"optimize", r.timings.optimize}, {"adjust", r.timings.adjust},
                       {"total", r.timings.total}};
  report["optimizer_status"] = std::string(to_string(r.optimization.status));
  report["optimizer_iterations"] = r.optimization.iterations;
  report["adjust_rounds"] = r.adjustment.rounds;
  report["feasible"] = r.adjustment.feasible;
  report["hull_safe"] = r.hull_safe;
  report["fallback"] = r.fallback;
  report["collision_free"] = r.collision_free;
  if (r.final) report["duration"] = r.final->duration();
  write_text_file(out_path(cfg, "report.json"), report.dump(2) + "\n");

  std::cout.precision(4);
  switch (r.status) {
    case PlanStatus::SearchFailed:
      std::cout << "search failure: " << to_string(r.search.status) << '\n';
      return kSearchFailed;
    case PlanStatus::OptimizerFallback:
      std::cout << "optimizer fallback: unoptimized fit used\n";
      break;
    case PlanStatus::Infeasible:
      std::cout << "infeasible after time adjustment (" << r.adjustment.rounds << " rounds)\n";
      break;
    case PlanStatus::Success:
      std::cout << "success\n";
      break;
  }
  std::cout << "  search    " << 1e3 * r.timings.search << " ms, " << r.search.expansions << " expansions, T "
            << r.search.duration() << " s\n"
            << "  fit       " << 1e3 * r.timings.fit << " ms\n"
            << "  optimize  " << 1e3 * r.timings.optimize << " ms, " << r.optimization.iterations << " iterations ("
            << to_string(r.optimization.status) << ")\n"
            << "  adjust    " << 1e3 * r.timings.adjust << " ms, " << r.adjustment.rounds << " rounds\n";
  if (r.final) std::cout << "  duration  " << r.final->duration() << " s\n";
  std::cout << "  outputs in " << cfg.out_dir << '\n';
  if (r.status == PlanStatus::OptimizerFallback) return kFallback;
  if (r.status == PlanStatus::Infeasible) return kInfeasible;
  return kOk;
}

int cmd_bench(RunConfig cfg, const Globals& g, bool missions) {
  if (g.seed) cfg.bench.first_seed = *g.seed;
  cfg.validate();
  if (cfg.bench.seed_count < 10) throw std::invalid_argument("bench needs at least 10 seeds");
  if (missions) {
    const auto stats = run_mission_benchmark(cfg);
    write_file(out_path(cfg, "missions.csv"), [&](std::ostream& os) { write_mission_csv(os, stats); });
    int ok = 0, clean = 0;
    double jump = 0.0;
    for (const auto& s : stats) {
      ok += s.success;
      clean += s.success && s.collisions == 0;
      jump = std::max(jump, s.max_position_jump);
    }
    std::cout << "missions " << stats.size() << "  reached " << ok << "  reached without collision " << clean
              << "  max handoff jump " << jump << " m\n";
    return kOk;
  }
  const BenchmarkReport rep = run_benchmark(cfg);
  write_file(out_path(cfg, "seeds.csv"), [&](std::ostream& os) { write_seed_csv(os, rep); });
  write_file(out_path(cfg, "timings.csv"), [&](std::ostream& os) { write_timing_csv(os, rep); });
  write_file(out_path(cfg, "summary.csv"), [&](std::ostream& os) { write_summary_csv(os, rep); });
  print_summary(std::cout, rep);
  return kOk;
}

int cmd_mission(const Globals& g, const std::string& scenario_path) {
  RunConfig base = resolve(g);
  Scenario sc = load_scenario(scenario_path, base);
  for (const auto& o : g.overrides) apply_override(sc.config, o);
  if (!g.out.empty()) sc.config.out_dir = g.out;
  if (g.seed) sc.config.world.seed = *g.seed;
  sc.config.validate();
  const VoxelGrid world = scenario_world(sc);
  const MissionLog log = run_mission(world, sc.start, sc.goal, sc.config.planner, sc.config.mission, sc.reveals);
  write_file(out_path(sc.config, "mission.json"), [&](std::ostream& os) { write_mission_json(os, log); });
  write_file(out_path(sc.config, "executed.csv"), [&](std::ostream& os) { write_executed_csv(os, log); });
  std::cout << log.outcome << " after " << log.duration << " s: " << log.replans.size() << " plans ("
            << log.collision_triggers << " collision, " << log.periodic_triggers << " periodic), audit "
            << (log.collisions == 0 ? "clean" : std::to_string(log.collisions) + " collision samples")
            << ", max handoff jump " << log.max_position_jump << " m\n";
  return log.success && log.collisions == 0 ? kOk : kMissionFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinodynamic search, B-spline optimization and replanning for quadrotors"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "World seed (first seed for bench)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--set", g.overrides, "Override a config field, e.g. search.rho=5")->take_all();
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "Print the resolved configuration and exit");

  auto* gen = app.add_subcommand("gen", "Generate a random world and write its map file");
  std::vector<double> extent;
  std::optional<int> obstacles;
  std::optional<double> res, inflation;
  std::optional<std::string> kind;
  std::string gen_output;
  gen->add_option("--extent", extent, "World size x y z (m)")->expected(3);
  gen->add_option("--obstacles", obstacles, "Obstacle count");
  gen->add_option("--res", res, "Voxel size (m)");
  gen->add_option("--inflation", inflation, "Inflation radius (m)");
  gen->add_option("--kind", kind, "box-pillar or wall-with-hole");
  gen->add_option("-o,--output", gen_output, "Map file (default OUT/map.txt)");

  auto* plan_cmd = app.add_subcommand("plan", "Plan once and export every stage");
  std::string map_path;
  std::vector<double> start, goal;
  plan_cmd->add_option("--map", map_path, "Map file (default: generated world)")->check(CLI::ExistingFile);
  plan_cmd->add_option("--start", start, "Start position x y z")->expected(3);
  plan_cmd->add_option("--goal", goal, "Goal position x y z")->expected(3);

  auto* bench = app.add_subcommand("bench", "Seeded benchmark statistics");
  bool missions = false;
  std::optional<int> seeds, threads;
  bench->add_option("--seeds", seeds, "Number of seeds");
  bench->add_option("--threads", threads, "Worker threads");
  bench->add_flag("--missions", missions, "Run receding-horizon missions instead of single plans");

  auto* mission = app.add_subcommand("mission", "Simulate a receding-horizon mission from a scenario file");
  std::string scenario;
  mission->add_option("scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);

  for (auto* sub : {gen, plan_cmd, bench, mission}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    RunConfig cfg = resolve(g);
    if (extent.size() == 3) cfg.world.extent = to_vec(extent);
    if (obstacles) cfg.world.obstacle_count = *obstacles;
    if (res) cfg.resolution = *res;
    if (inflation) cfg.world.inflation_radius = *inflation;
    if (kind) cfg.world.obstacle_kind = obstacle_kind_from_string(*kind);
    if (seeds) cfg.bench.seed_count = *seeds;
    if (threads) cfg.bench.threads = *threads;
    if (dump_config) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return kOk;
    }
    if (*gen) return cmd_gen(cfg, g, gen_output);
    if (*plan_cmd) return cmd_plan(cfg, g, map_path, start, goal);
    if (*bench) return cmd_bench(cfg, g, missions);
    if (*mission) return cmd_mission(g, scenario);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
