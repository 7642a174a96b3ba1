#include "kinoplan/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace kinoplan {

std::vector<std::uint64_t> BenchConfig::seeds() const {
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(std::max(seed_count, 0)));
  for (int i = 0; i < seed_count; ++i) out.push_back(first_seed + static_cast<std::uint64_t>(i));
  return out;
}

void BenchConfig::validate() const {
  if (seed_count < 1) throw std::invalid_argument("bench: seed_count must be >= 1");
  if (!(separation > 0)) throw std::invalid_argument("bench: separation must be > 0");
  if (free_margin < 0) throw std::invalid_argument("bench: free_margin must be >= 0");
  if (threads < 1) throw std::invalid_argument("bench: threads must be >= 1");
  if (reference_iters < 0) throw std::invalid_argument("bench: reference_iters must be >= 0");
  if (convergence_window < 1) throw std::invalid_argument("bench: convergence_window must be >= 1");
}

void RunConfig::validate() const {
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be > 0");
  if ((world.extent.array() <= 0).any()) throw std::invalid_argument("world: extent must be positive");
  if (world.obstacle_count < 0) throw std::invalid_argument("world: obstacle_count must be >= 0");
  planner.validate();
  mission.validate();
  bench.validate();
}

bool RunConfig::operator==(const RunConfig& o) const { return to_json(*this) == to_json(o); }

std::string to_string(ObstacleKind k) {
  return k == ObstacleKind::BoxPillar ? "box-pillar" : "wall-with-hole";
}

ObstacleKind obstacle_kind_from_string(const std::string& s) {
  if (s == "box-pillar") return ObstacleKind::BoxPillar;
  if (s == "wall-with-hole") return ObstacleKind::WallWithHole;
  throw std::invalid_argument("unknown obstacle kind '" + s + "'");
}

namespace {

// Field tables shared by the writer and the reader.
template <class V> void fields(V& v, SearchConfig& c) {
  v("u_max", c.u_max);
  v("v_max", c.v_max);
  v("a_max", c.a_max);
  v("r", c.r);
  v("tau", c.tau);
  v("rho", c.rho);
  v("goal_tolerance", c.goal_tolerance);
  v("check_step", c.check_step);
  v("max_expansions", c.max_expansions);
  v("prune_resolution", c.prune_resolution);
  v("prune_siblings", c.prune_siblings);
  v("analytic_expansion", c.analytic_expansion);
}

template <class V> void fields(V& v, OptimizerConfig& c) {
  v("lambda1", c.lambda1);
  v("lambda2", c.lambda2);
  v("lambda3", c.lambda3);
  v("d_thr", c.d_thr);
  v("v_max", c.v_max);
  v("a_max", c.a_max);
  v("max_iters", c.max_iters);
  v("budget", c.budget);
  v("grad_tol", c.grad_tol);
  v("out_of_field_weight", c.out_of_field_weight);
  v("precondition", c.precondition);
}

template <class V> void fields(V& v, TimeAdjustConfig& c) {
  v("v_max", c.v_max);
  v("a_max", c.a_max);
  v("alpha_v", c.alpha_v);
  v("alpha_a", c.alpha_a);
  v("max_rounds", c.max_rounds);
  v("preserve_endpoints", c.preserve_endpoints);
}

template <class V> void fields(V& v, MissionConfig& c) {
  v("sensing_radius", c.sensing_radius);
  v("replan_period", c.replan_period);
  v("tick", c.tick);
  v("commit_latency", c.commit_latency);
  v("timeout", c.timeout);
  v("goal_tolerance", c.goal_tolerance);
  v("audit_step", c.audit_step);
  v("max_failed_replans", c.max_failed_replans);
}

template <class V> void fields(V& v, WorldSpec& c) {
  v("extent", c.extent);
  v("origin", c.origin);
  v("obstacle_count", c.obstacle_count);
  v("obstacle_kind", c.obstacle_kind);
  v("seed", c.seed);
  v("inflation_radius", c.inflation_radius);
  v("min_footprint", c.min_footprint);
  v("max_footprint", c.max_footprint);
  v("free_regions", c.free_regions);
  v("max_rejections", c.max_rejections);
}

template <class V> void fields(V& v, BenchConfig& c) {
  v("first_seed", c.first_seed);
  v("seed_count", c.seed_count);
  v("separation", c.separation);
  v("altitude", c.altitude);
  v("free_margin", c.free_margin);
  v("threads", c.threads);
  v("reference_iters", c.reference_iters);
  v("convergence_window", c.convergence_window);
}

template <class V> void fields(V& v, PlannerConfig& c) {
  v("sample_dt", c.sample_dt);
  v("field_cap_factor", c.field_cap_factor);
  v("collision_step", c.collision_step);
}

Json encode(const Vec3& x) { return to_json(x); }
Json encode(ObstacleKind k) { return to_string(k); }
Json encode(const std::vector<Box>& boxes) {
  Json out = Json::array();
  for (const auto& b : boxes) out.push_back({{"min", to_json(b.min)}, {"max", to_json(b.max)}});
  return out;
}
template <class T> Json encode(const T& x) { return x; }

void decode(const Json& j, Vec3& x) { x = vec3_from_json(j); }
void decode(const Json& j, ObstacleKind& k) { k = obstacle_kind_from_string(j.get<std::string>()); }
void decode(const Json& j, std::vector<Box>& boxes) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of boxes");
  boxes.clear();
  for (const auto& b : j) {
    for (const auto& [key, _] : b.items())
      if (key != "min" && key != "max") throw std::invalid_argument("unknown box key '" + key + "'");
    boxes.push_back({vec3_from_json(b.at("min")), vec3_from_json(b.at("max"))});
  }
}
void decode(const Json& j, bool& x) {
  if (!j.is_boolean()) throw std::invalid_argument("expected a boolean, got " + j.dump());
  x = j.get<bool>();
}
void decode(const Json& j, int& x) {
  if (!j.is_number_integer()) throw std::invalid_argument("expected an integer, got " + j.dump());
  x = j.get<int>();
}
void decode(const Json& j, std::uint64_t& x) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw std::invalid_argument("expected a non-negative integer, got " + j.dump());
  x = j.get<std::uint64_t>();
}
void decode(const Json& j, double& x) {
  if (!j.is_number()) throw std::invalid_argument("expected a number, got " + j.dump());
  x = j.get<double>();
}

struct Writer {
  Json& out;
  template <class T> void operator()(const char* name, const T& x) { out[name] = encode(x); }
};

struct Reader {
  const Json& in;
  std::string section;
  std::set<std::string> seen;
  template <class T> void operator()(const char* name, T& x) {
    seen.insert(name);
    if (auto it = in.find(name); it != in.end()) {
      try {
        decode(*it, x);
      } catch (const std::exception& e) {
        throw std::invalid_argument(section + "." + name + ": " + e.what());
      }
    }
  }
  void check_unknown() const {
    for (const auto& [key, _] : in.items())
      if (!seen.count(key)) throw std::invalid_argument("unknown config key '" + section + "." + key + "'");
  }
};

template <class T> Json write_section(T& x) {
  Json j = Json::object();
  Writer w{j};
  fields(w, x);
  return j;
}

template <class T> void read_section(const Json& root, const std::string& name, T& x) {
  const auto it = root.find(name);
  if (it == root.end()) return;
  if (!it->is_object()) throw std::invalid_argument("config section '" + name + "' must be an object");
  Reader r{*it, name, {}};
  fields(r, x);
  r.check_unknown();
}

const std::set<std::string> kTopLevel = {"world", "resolution", "search", "optimizer", "time_adjust",
                                         "planner", "mission", "bench", "out_dir"};

}  // namespace

Json to_json(const RunConfig& cfg) {
  RunConfig c = cfg;
  Json j;
  j["world"] = write_section(c.world);
  j["resolution"] = c.resolution;
  j["search"] = write_section(c.planner.search);
  j["optimizer"] = write_section(c.planner.optimizer);
  j["time_adjust"] = write_section(c.planner.time_adjust);
  j["planner"] = write_section(c.planner);
  j["mission"] = write_section(c.mission);
  j["bench"] = write_section(c.bench);
  j["out_dir"] = c.out_dir;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kTopLevel.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  RunConfig c;
  read_section(j, "world", c.world);
  read_section(j, "search", c.planner.search);
  read_section(j, "optimizer", c.planner.optimizer);
  read_section(j, "time_adjust", c.planner.time_adjust);
  read_section(j, "planner", c.planner);
  read_section(j, "mission", c.mission);
  read_section(j, "bench", c.bench);
  if (auto it = j.find("resolution"); it != j.end()) decode(*it, c.resolution);
  if (auto it = j.find("out_dir"); it != j.end()) c.out_dir = it->get<std::string>();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  try {
    return run_config_from_json(read_json_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  write_text_file(path, to_json(cfg).dump(2) + "\n");
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must be key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json j = to_json(cfg);
  Json::json_pointer ptr;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    ptr /= key.substr(pos, dot - pos);
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (!j.contains(ptr)) throw std::invalid_argument("unknown config key '" + key + "'");
  j[ptr] = value;
  cfg = run_config_from_json(j);
}

Scenario scenario_from_json(const Json& j, const std::string& base_dir, const RunConfig& base) {
  static const std::set<std::string> known = {"map", "start", "goal", "reveals", "config"};
  if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("unknown scenario key '" + key + "'");
  Scenario s;
  s.config = base;
  if (auto it = j.find("config"); it != j.end()) {
    Json merged = to_json(base);
    merged.merge_patch(*it);
    s.config = run_config_from_json(merged);
  }
  if (auto it = j.find("map"); it != j.end()) {
    std::filesystem::path p = it->get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    s.map_path = p.string();
  }
  s.start.position = vec3_from_json(j.at("start"));
  s.goal.position = vec3_from_json(j.at("goal"));
  if (auto it = j.find("reveals"); it != j.end())
    for (const auto& r : *it)
      s.reveals.push_back({r.at("time").get<double>(), Box{vec3_from_json(r.at("min")), vec3_from_json(r.at("max"))}});
  return s;
}

Scenario load_scenario(const std::string& path, const RunConfig& base) {
  try {
    return scenario_from_json(read_json_file(path), std::filesystem::path(path).parent_path().string(), base);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

Json to_json(const Scenario& s) {
  Json j;
  if (!s.map_path.empty()) j["map"] = s.map_path;
  j["start"] = to_json(s.start.position);
  j["goal"] = to_json(s.goal.position);
  Json reveals = Json::array();
  for (const auto& r : s.reveals) reveals.push_back({{"time", r.time}, {"min", to_json(r.box.min)}, {"max", to_json(r.box.max)}});
  j["reveals"] = reveals;
  j["config"] = to_json(s.config);
  return j;
}

VoxelGrid scenario_world(const Scenario& s) {
  if (!s.map_path.empty()) return load_map(s.map_path);
  return generate_world(s.config.world, s.config.resolution);
}

}  // namespace kinoplan
