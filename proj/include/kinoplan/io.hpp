#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinoplan/bspline.hpp"
#include "kinoplan/kino_search.hpp"
#include "kinoplan/types.hpp"

namespace kinoplan {

using Json = nlohmann::json;

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);

/// {"degree": p, "knots": [...], "control_points": [[x, y, z], ...]}
Json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const Json& j);

/// Primitives (start, input, duration), analytic tail, costs, expansions, wall time.
Json search_result_to_json(const SearchResult& r);

/// Columns t,x,y,z,vx,vy,vz,ax,ay,az sampled every dt; the domain end is always included.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double dt);
void write_states_csv(std::ostream& os, const std::vector<TimedState>& states);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace kinoplan
