#include "kinoplan/io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kinoplan {

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json trajectory_to_json(const Trajectory& traj) {
  Json j;
  j["degree"] = traj.degree();
  j["knots"] = std::vector<double>(traj.knots().data(), traj.knots().data() + traj.knots().size());
  Json cps = Json::array();
  for (Eigen::Index i = 0; i < traj.control_points().cols(); ++i) cps.push_back(to_json(traj.control_points().col(i)));
  j["control_points"] = cps;
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  const int degree = j.at("degree").get<int>();
  const auto knots = j.at("knots").get<std::vector<double>>();
  const auto& cps = j.at("control_points");
  Trajectory::Points q(3, cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) q.col(i) = vec3_from_json(cps[i]);
  Trajectory::Knots t = Eigen::Map<const Eigen::VectorXd>(knots.data(), knots.size());
  return Trajectory(std::move(q), std::move(t), degree);
}

namespace {

Json state_to_json(const State& s) { return {{"position", to_json(s.position)}, {"velocity", to_json(s.velocity)}}; }

}  // namespace

Json search_result_to_json(const SearchResult& r) {
  Json j;
  j["status"] = std::string(to_string(r.status));
  j["start"] = state_to_json(r.start);
  Json prims = Json::array();
  for (const auto& p : r.primitives)
    prims.push_back({{"start", state_to_json(p.start)}, {"input", to_json(p.input)}, {"duration", p.duration}});
  j["primitives"] = prims;
  if (r.tail)
    j["tail"] = {{"start", state_to_json(r.tail->start)},
                 {"alpha", to_json(r.tail->alpha)},
                 {"beta", to_json(r.tail->beta)},
                 {"duration", r.tail->duration}};
  else
    j["tail"] = nullptr;
  j["g_cost"] = r.g_cost;
  j["total_cost"] = r.total_cost;
  j["control_cost"] = r.success() ? r.control_cost() : 0.0;
  j["duration"] = r.success() ? r.duration() : 0.0;
  j["expansions"] = r.expansions;
  j["wall_time"] = r.wall_time;
  j["reached_horizon"] = r.reached_horizon;
  return j;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("write_trajectory_csv: dt must be > 0");
  os << "t,x,y,z,vx,vy,vz,ax,ay,az\n";
  os.precision(12);
  const long n = static_cast<long>(std::ceil(traj.duration() / dt - 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = std::min(traj.t_begin() + k * dt, traj.t_end());
    const Vec3 p = traj.eval(t), v = traj.eval(t, 1), a = traj.eval(t, 2);
    os << t << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << v.x() << ',' << v.y() << ',' << v.z() << ','
       << a.x() << ',' << a.y() << ',' << a.z() << '\n';
  }
}

void write_states_csv(std::ostream& os, const std::vector<TimedState>& states) {
  os << "t,x,y,z,vx,vy,vz\n";
  os.precision(12);
  for (const auto& s : states) {
    const Vec3& p = s.state.position;
    const Vec3& v = s.state.velocity;
    os << s.time << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << v.x() << ',' << v.y() << ',' << v.z()
       << '\n';
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace kinoplan
