#pragma once

#include <random>

#include "kinoplan/types.hpp"
#include "kinoplan/voxel_map.hpp"

namespace testing {

using kinoplan::Vec3;
using kinoplan::Vec3i;

inline Vec3 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline Vec3 random_in_box(std::mt19937_64& rng, const Vec3& lo, const Vec3& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return lo.array() + (hi - lo).array() * Vec3(u(rng), u(rng), u(rng)).array();
}

inline kinoplan::VoxelGrid empty_grid(const Vec3i& dims, double res = 0.2, double inflation = 0.0) {
  return kinoplan::VoxelGrid(Vec3::Zero(), res, dims, inflation);
}

/// Relative error with an absolute floor for near-zero references.
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

}  // namespace testing
