#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "kinoplan/voxel_map.hpp"

namespace kinoplan {

struct FieldSample {
  double distance = 0.0;
  Vec3 gradient = Vec3::Zero();
  /// False when the query fell outside the interpolable interior and was clamped.
  bool inside = true;
};

/// Euclidean distance from every voxel center to the nearest occupied
/// (inflated-layer) voxel center, with trilinear interpolation between
/// centers. Gradients point toward increasing distance.
class DistanceField {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  DistanceField() = default;

  /// Exact transform via separable 1-D lower envelopes of squared distances.
  /// Distances are capped at `cap`; a grid without obstacles yields `cap`
  /// (infinity by default) everywhere.
  static DistanceField build(const VoxelGrid& g, double cap = kInfinity);

  /// Recomputes distances after obstacles were added inside [lo, hi] (voxel
  /// indices, inclusive). The transform is run over the window grown by the
  /// cap and merged by minimum with the previous field, which equals a full
  /// rebuild whenever obstacles are only ever added.
  void update_window(const VoxelGrid& g, const Vec3i& lo, const Vec3i& hi);

  double at(const Vec3i& idx) const { return distances_[linear(idx)]; }
  const std::vector<double>& distances() const { return distances_; }

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Vec3i& dims() const { return dims_; }
  double cap() const { return cap_; }

  FieldSample evaluate(const Vec3& p) const;
  double distance_at(const Vec3& p) const { return evaluate(p).distance; }
  Vec3 gradient_at(const Vec3& p) const { return evaluate(p).gradient; }
  /// Whether `p` lies in the half-voxel-inset interior spanned by voxel centers.
  bool in_interior(const Vec3& p) const;
  /// Nearest point of the interior box.
  Vec3 clamp_to_interior(const Vec3& p) const;

  /// Debug dump: ASCII header line, then float32 distances in x-fastest order.
  void write_debug(std::ostream& os) const;

 private:
  std::size_t linear(const Vec3i& idx) const {
    return static_cast<std::size_t>(idx.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(idx.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(idx.z()));
  }

  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  Vec3i dims_ = Vec3i::Ones();
  double cap_ = kInfinity;
  std::vector<double> distances_ = std::vector<double>(1, kInfinity);
};

/// Squared-distance transform of a dense lattice (voxel units). `f` holds 0 at
/// sites and a large value elsewhere; it is transformed in place.
void squared_distance_transform(std::vector<double>& f, const Vec3i& dims);

}  // namespace kinoplan
