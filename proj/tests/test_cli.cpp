#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kinoplan/config.hpp"

namespace fs = std::filesystem;
using namespace kinoplan;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "kinoplan_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string(KINOPLAN_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code != 0);
  CHECK(run("frobnicate").code != 0);
  const Run bad = run("--set search.nope=1 gen -o " + path("x.txt"));
  CHECK(bad.code == 1);
  CHECK(bad.err.find("nope") != std::string::npos);
}

TEST_CASE("dump-config round trip") {
  const Run a = run("--set search.rho=4.5 --dump-config gen");
  REQUIRE(a.code == 0);
  std::ofstream(path("cfg.json")) << a.out;
  const RunConfig cfg = load_run_config(path("cfg.json"));
  CHECK(cfg.planner.search.rho == 4.5);
  const Run b = run("--config " + path("cfg.json") + " --dump-config gen");
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("gen") {
  REQUIRE(run("--seed 5 gen -o " + path("a.txt")).code == 0);
  REQUIRE(run("--seed 5 gen -o " + path("b.txt")).code == 0);
  REQUIRE(run("--seed 6 gen -o " + path("c.txt")).code == 0);
  CHECK(read(path("a.txt")) == read(path("b.txt")));
  CHECK(read(path("a.txt")) != read(path("c.txt")));
  CHECK(load_map(path("a.txt")).raw_count() > 0);

  const Run empty = run("gen --obstacles 0 --extent 10 8 3 --res 0.5 -o " + path("empty.txt"));
  REQUIRE(empty.code == 0);
  CHECK(empty.out.find("wrote") != std::string::npos);
  const VoxelGrid g = load_map(path("empty.txt"));
  CHECK(g.raw_count() == 0);
  CHECK(g.dims() == Vec3i(20, 16, 6));
  CHECK(g.resolution() == 0.5);
}

TEST_CASE("plan") {
  const std::string out = path("plan_ok");
  const Run ok = run("--out " + out + " --set world.obstacle_count=0 plan");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("success") != std::string::npos);
  for (const char* f : {"search.json", "path.csv", "trace.csv", "report.json"}) CHECK(fs::exists(fs::path(out) / f));
  const Json report = read_json_file((fs::path(out) / "report.json").string());
  CHECK(report.is_object());

  VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(50, 50, 20), 0.3);
  g.add_obstacle({10, 10, 5});
  save_map(path("blocked.txt"), g);
  const Vec3 p = g.index_to_world({10, 10, 5});
  std::ostringstream args;
  args << "--out " << path("plan_blocked") << " plan --map " << path("blocked.txt") << " --start " << p.x() << ' '
       << p.y() << ' ' << p.z() << " --goal 8 8 2";
  const Run blocked = run(args.str());
  CHECK(blocked.code == 2);
  CHECK(blocked.out.find("start-in-collision") != std::string::npos);
}

TEST_CASE("bench") {
  const Run few = run("bench --seeds 5");
  CHECK(few.code == 1);
  CHECK(few.err.find("10 seeds") != std::string::npos);

  const std::string common = " --set world.obstacle_count=20 bench.reference_iters=0 bench --seeds 10";
  REQUIRE(run("--out " + path("bench1") + common + " --threads 1").code == 0);
  REQUIRE(run("--out " + path("bench2") + common + " --threads 4").code == 0);
  const std::string seeds = read(fs::path(path("bench1")) / "seeds.csv");
  CHECK(seeds == read(fs::path(path("bench2")) / "seeds.csv"));
  CHECK(std::count(seeds.begin(), seeds.end(), '\n') == 11);
  CHECK(fs::exists(fs::path(path("bench1")) / "timings.csv"));
  CHECK(fs::exists(fs::path(path("bench1")) / "summary.csv"));
}

TEST_CASE("mission") {
  VoxelGrid g(Vec3::Zero(), 0.2, Vec3i(100, 50, 15), 0.3);
  save_map(path("open.txt"), g);
  std::ofstream(path("open.json")) << R"({"map": "open.txt", "start": [8, 5, 1], "goal": [12, 5, 1]})";
  const Run ok = run("--out " + path("mission_ok") + " mission " + path("open.json"));
  CHECK(ok.code == 0);
  CHECK(ok.out.find("goal-reached") != std::string::npos);
  const Json log = read_json_file((fs::path(path("mission_ok")) / "mission.json").string());
  CHECK(log["success"] == true);
  CHECK(fs::exists(fs::path(path("mission_ok")) / "executed.csv"));

  for (int i = 20; i <= 30; ++i)
    for (int j = 15; j <= 35; ++j)
      for (int k = 0; k < 15; ++k)
        if (i == 20 || i == 30 || j == 15 || j == 35 || k == 0 || k == 14) g.add_obstacle({i, j, k});
  save_map(path("sealed.txt"), g);
  std::ofstream(path("sealed.json")) << R"({"map": "sealed.txt", "start": [12, 5, 1], "goal": [5, 5, 1.4],
    "config": {"mission": {"timeout": 10}}})";
  const Run sealed = run("--out " + path("mission_sealed") + " mission " + path("sealed.json"));
  CHECK(sealed.code == 5);
  const Json failed = read_json_file((fs::path(path("mission_sealed")) / "mission.json").string());
  CHECK(failed["success"] == false);
  CHECK(failed["collisions"] == 0);
}
