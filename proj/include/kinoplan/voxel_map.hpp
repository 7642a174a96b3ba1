#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kinoplan/types.hpp"

namespace kinoplan {

/// Dense axis-aligned occupancy grid.
///
/// Two layers are kept: the raw occupancy as generated or sensed, and the
/// configuration-space layer obtained by inflating every raw voxel by
/// `inflation_radius`. Collision queries (`occupied`, `is_free`) use the
/// inflated layer. The inflated layer is always a superset of the raw one.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double resolution, const Vec3i& dims,
            double inflation_radius = 0.0);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Vec3i& dims() const { return dims_; }
  double inflation_radius() const { return inflation_radius_; }
  std::size_t size() const { return raw_.size(); }
  Vec3 extent() const { return dims_.cast<double>() * resolution_; }

  bool in_bounds(const Vec3i& idx) const {
    return (idx.array() >= 0).all() && (idx.array() < dims_.array()).all();
  }
  bool in_bounds(const Vec3& p) const { return world_to_index(p).has_value(); }

  /// floor((p - origin) / resolution); nullopt outside the grid.
  std::optional<Vec3i> world_to_index(const Vec3& p) const {
    Vec3i idx;
    for (int a = 0; a < 3; ++a) {
      const double f = std::floor((p[a] - origin_[a]) / resolution_);
      if (!(f >= 0.0) || f >= dims_[a]) return std::nullopt;
      idx[a] = static_cast<int>(f);
    }
    return idx;
  }
  /// Center of voxel `idx`.
  Vec3 index_to_world(const Vec3i& idx) const {
    return origin_ + (idx.cast<double>().array() + 0.5).matrix() * resolution_;
  }

  std::size_t linear(const Vec3i& idx) const {
    return static_cast<std::size_t>(idx.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(idx.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(idx.z()));
  }
  Vec3i unravel(std::size_t k) const;

  bool raw_occupied(const Vec3i& idx) const { return raw_[linear(idx)] != 0; }
  bool occupied(const Vec3i& idx) const { return inflated_[linear(idx)] != 0; }
  /// True iff `p` is inside the grid and its voxel is free in the inflated layer.
  bool is_free(const Vec3& p) const {
    const auto idx = world_to_index(p);
    return idx && !occupied(*idx);
  }

  /// Marks a raw voxel and stamps its inflation ball into the inflated layer.
  void add_obstacle(const Vec3i& idx);
  /// Sets a raw voxel without touching the inflated layer; call inflate() after.
  void set_raw(const Vec3i& idx, bool occupied) { raw_[linear(idx)] = occupied ? 1 : 0; }
  void set_inflation_radius(double r) { inflation_radius_ = r; }

  /// Recomputes the inflated layer from the raw layer.
  void inflate();

  const std::vector<std::uint8_t>& raw_layer() const { return raw_; }
  const std::vector<std::uint8_t>& inflated_layer() const { return inflated_; }
  std::vector<Vec3i> raw_occupied_voxels() const;
  std::size_t raw_count() const;
  std::size_t inflated_count() const;

  /// Voxel offsets whose centers lie within the inflation radius.
  std::vector<Vec3i> inflation_offsets() const;

  bool operator==(const VoxelGrid& o) const = default;

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  Vec3i dims_ = Vec3i::Ones();
  double inflation_radius_ = 0.0;
  std::vector<std::uint8_t> raw_ = std::vector<std::uint8_t>(1, 0);
  std::vector<std::uint8_t> inflated_ = std::vector<std::uint8_t>(1, 0);
};

/// Returns a copy whose inflated layer is rebuilt from the raw layer.
VoxelGrid inflate(VoxelGrid g);

enum class ObstacleKind { BoxPillar, WallWithHole };

struct WorldSpec {
  Vec3 extent = Vec3(40.0, 40.0, 5.0);
  Vec3 origin = Vec3::Zero();
  int obstacle_count = 100;
  ObstacleKind obstacle_kind = ObstacleKind::BoxPillar;
  std::uint64_t seed = 0;
  double inflation_radius = 0.3;
  double min_footprint = 0.4;
  double max_footprint = 1.2;
  /// Regions kept free of (inflated) obstacles, e.g. around start and goal.
  std::vector<Box> free_regions;
  int max_rejections = 10000;
};

/// Seeded random world. Throws std::runtime_error when the free regions
/// cannot be honored within `max_rejections` draws per obstacle.
VoxelGrid generate_world(const WorldSpec& spec, double resolution);

/// Map file: header "# origin ox oy oz res r dims nx ny nz" followed by
/// one raw-occupied voxel center "x y z" per line.
void save_map(std::ostream& os, const VoxelGrid& g);
VoxelGrid load_map(std::istream& is);
void save_map(const std::string& path, const VoxelGrid& g);
VoxelGrid load_map(const std::string& path);

}  // namespace kinoplan
