#include "kinoplan/voxel_map.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kinoplan/rng.hpp"

namespace kinoplan {

VoxelGrid::VoxelGrid(const Vec3& origin, double resolution, const Vec3i& dims,
                     double inflation_radius)
    : origin_(origin), resolution_(resolution), dims_(dims), inflation_radius_(inflation_radius) {
  if (!(resolution > 0.0)) throw std::invalid_argument("VoxelGrid: resolution must be > 0");
  if ((dims.array() < 1).any()) throw std::invalid_argument("VoxelGrid: dims must be >= 1");
  if (inflation_radius < 0.0) throw std::invalid_argument("VoxelGrid: negative inflation radius");
  const auto n = static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
  raw_.assign(n, 0);
  inflated_.assign(n, 0);
}

Vec3i VoxelGrid::unravel(std::size_t k) const {
  const auto nx = static_cast<std::size_t>(dims_.x());
  const auto ny = static_cast<std::size_t>(dims_.y());
  return Vec3i(static_cast<int>(k % nx), static_cast<int>((k / nx) % ny),
               static_cast<int>(k / (nx * ny)));
}

std::vector<Vec3i> VoxelGrid::inflation_offsets() const {
  std::vector<Vec3i> offsets;
  const double r = inflation_radius_ / resolution_;
  const int reach = static_cast<int>(std::floor(r + 1e-9));
  const double r2 = r * r + 1e-9;
  for (int dz = -reach; dz <= reach; ++dz)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx)
        if (dx * dx + dy * dy + dz * dz <= r2) offsets.emplace_back(dx, dy, dz);
  return offsets;
}

void VoxelGrid::add_obstacle(const Vec3i& idx) {
  raw_[linear(idx)] = 1;
  for (const auto& o : inflation_offsets()) {
    const Vec3i n = idx + o;
    if (in_bounds(n)) inflated_[linear(n)] = 1;
  }
}

void VoxelGrid::inflate() {
  const auto offsets = inflation_offsets();
  inflated_ = raw_;
  if (offsets.size() <= 1) return;
  for (std::size_t k = 0; k < raw_.size(); ++k) {
    if (!raw_[k]) continue;
    const Vec3i idx = unravel(k);
    for (const auto& o : offsets) {
      const Vec3i n = idx + o;
      if (in_bounds(n)) inflated_[linear(n)] = 1;
    }
  }
}

std::vector<Vec3i> VoxelGrid::raw_occupied_voxels() const {
  std::vector<Vec3i> out;
  for (std::size_t k = 0; k < raw_.size(); ++k)
    if (raw_[k]) out.push_back(unravel(k));
  return out;
}

std::size_t VoxelGrid::raw_count() const {
  std::size_t n = 0;
  for (auto v : raw_) n += v;
  return n;
}

std::size_t VoxelGrid::inflated_count() const {
  std::size_t n = 0;
  for (auto v : inflated_) n += v;
  return n;
}

VoxelGrid inflate(VoxelGrid g) {
  g.inflate();
  return g;
}

namespace {

// Marks every voxel whose cube overlaps `b` with positive volume.
void rasterize(VoxelGrid& g, const Box& b) {
  const double res = g.resolution();
  Vec3i lo, hi;
  for (int a = 0; a < 3; ++a) {
    const double rel_lo = (b.min[a] - g.origin()[a]) / res;
    const double rel_hi = (b.max[a] - g.origin()[a]) / res;
    lo[a] = std::max(0, static_cast<int>(std::floor(rel_lo)));
    hi[a] = std::min(g.dims()[a] - 1, static_cast<int>(std::ceil(rel_hi)) - 1);
  }
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) g.set_raw(Vec3i(x, y, z), true);
}

std::vector<Box> draw_obstacle(const WorldSpec& spec, CounterRng& rng) {
  const Vec3 lo = spec.origin;
  const Vec3 hi = spec.origin + spec.extent;
  if (spec.obstacle_kind == ObstacleKind::BoxPillar) {
    const double wx = rng.uniform(spec.min_footprint, spec.max_footprint);
    const double wy = rng.uniform(spec.min_footprint, spec.max_footprint);
    const double cx = rng.uniform(lo.x(), hi.x());
    const double cy = rng.uniform(lo.y(), hi.y());
    return {Box{Vec3(cx - wx / 2, cy - wy / 2, lo.z()), Vec3(cx + wx / 2, cy + wy / 2, hi.z())}};
  }
  // Wall segment with a rectangular hole, oriented along x or y.
  const bool along_x = rng.uniform() < 0.5;
  const double length = rng.uniform(2.0, 6.0);
  const double thick = rng.uniform(0.2, 0.4);
  const double cx = rng.uniform(lo.x(), hi.x());
  const double cy = rng.uniform(lo.y(), hi.y());
  const double hole_w = rng.uniform(0.8, 1.2);
  const double hole_h = rng.uniform(0.8, 1.2);
  const double hole_c = rng.uniform(-length / 2 + hole_w / 2, length / 2 - hole_w / 2);
  const double hole_z = rng.uniform(lo.z() + 0.5, std::max(lo.z() + 0.5, hi.z() - hole_h - 0.5));
  const int a = along_x ? 0 : 1;
  const int b = 1 - a;
  auto make = [&](double s0, double s1, double z0, double z1) {
    Box box;
    box.min[a] = (a == 0 ? cx : cy) + s0;
    box.max[a] = (a == 0 ? cx : cy) + s1;
    box.min[b] = (b == 0 ? cx : cy) - thick / 2;
    box.max[b] = (b == 0 ? cx : cy) + thick / 2;
    box.min.z() = z0;
    box.max.z() = z1;
    return box;
  };
  return {make(-length / 2, hole_c - hole_w / 2, lo.z(), hi.z()),
          make(hole_c + hole_w / 2, length / 2, lo.z(), hi.z()),
          make(hole_c - hole_w / 2, hole_c + hole_w / 2, lo.z(), hole_z),
          make(hole_c - hole_w / 2, hole_c + hole_w / 2, hole_z + hole_h, hi.z())};
}

}  // namespace

VoxelGrid generate_world(const WorldSpec& spec, double resolution) {
  if (spec.obstacle_count < 0) throw std::invalid_argument("generate_world: negative obstacle count");
  Vec3i dims;
  for (int a = 0; a < 3; ++a)
    dims[a] = std::max(1, static_cast<int>(std::lround(spec.extent[a] / resolution)));
  VoxelGrid g(spec.origin, resolution, dims, spec.inflation_radius);

  // Obstacles must clear the free regions in configuration space.
  const double margin = spec.inflation_radius + resolution;
  CounterRng rng(spec.seed);
  for (int k = 0; k < spec.obstacle_count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_rejections && !placed; ++attempt) {
      const auto boxes = draw_obstacle(spec, rng);
      bool clash = false;
      for (const auto& b : boxes)
        for (const auto& fr : spec.free_regions)
          if (b.intersects(fr.expanded(margin))) clash = true;
      if (clash) continue;
      for (const auto& b : boxes) rasterize(g, b);
      placed = true;
    }
    if (!placed)
      throw std::runtime_error("generate_world: could not keep free regions clear for obstacle " +
                               std::to_string(k));
  }
  g.inflate();
  return g;
}

void save_map(std::ostream& os, const VoxelGrid& g) {
  os << std::setprecision(17);
  os << "# origin " << g.origin().x() << ' ' << g.origin().y() << ' ' << g.origin().z() << " res "
     << g.resolution() << " r " << g.inflation_radius() << " dims " << g.dims().x() << ' '
     << g.dims().y() << ' ' << g.dims().z() << '\n';
  for (const auto& idx : g.raw_occupied_voxels()) {
    const Vec3 c = g.index_to_world(idx);
    os << c.x() << ' ' << c.y() << ' ' << c.z() << '\n';
  }
}

VoxelGrid load_map(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("load_map: empty map file");
  std::istringstream hs(line);
  std::string hash, k_origin, k_res, k_r, k_dims;
  Vec3 origin;
  double res = 0.0, r = 0.0;
  Vec3i dims;
  hs >> hash >> k_origin >> origin.x() >> origin.y() >> origin.z() >> k_res >> res >> k_r >> r >>
      k_dims >> dims.x() >> dims.y() >> dims.z();
  if (!hs || hash != "#" || k_origin != "origin" || k_res != "res" || k_r != "r" || k_dims != "dims")
    throw std::runtime_error("load_map: malformed header: " + line);
  VoxelGrid g(origin, res, dims, r);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z()))
      throw std::runtime_error("load_map: bad point on line " + std::to_string(lineno));
    const auto idx = g.world_to_index(p);
    if (!idx) throw std::runtime_error("load_map: point outside grid on line " + std::to_string(lineno));
    g.set_raw(*idx, true);
  }
  g.inflate();
  return g;
}

void save_map(const std::string& path, const VoxelGrid& g) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write map file: " + path);
  save_map(os, g);
}

VoxelGrid load_map(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read map file: " + path);
  return load_map(is);
}

}  // namespace kinoplan
