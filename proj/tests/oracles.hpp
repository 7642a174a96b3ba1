#pragma once

#include <cmath>
#include <vector>

#include "kinoplan/bspline.hpp"
#include "kinoplan/distance_field.hpp"

namespace testing {

using kinoplan::Trajectory;

// Cox-de Boor basis functions N_{i,p}(t), with the last span closed on the right.
inline std::vector<double> cox_de_boor(const Trajectory::Knots& t, int p, double x) {
  const int m = static_cast<int>(t.size()) - 1;
  const double t_hi = t[m - p];
  std::vector<double> n(m, 0.0);
  for (int i = 0; i < m; ++i) {
    if (x == t_hi)
      n[i] = t[i] < t[i + 1] && t[i + 1] == t_hi ? 1.0 : 0.0;
    else
      n[i] = t[i] <= x && x < t[i + 1] ? 1.0 : 0.0;
  }
  for (int d = 1; d <= p; ++d)
    for (int i = 0; i + d < m; ++i) {
      double v = 0.0;
      if (t[i + d] > t[i]) v += (x - t[i]) / (t[i + d] - t[i]) * n[i];
      if (t[i + d + 1] > t[i + 1]) v += (t[i + d + 1] - x) / (t[i + d + 1] - t[i + 1]) * n[i + 1];
      n[i] = v;
    }
  n.resize(m - p);
  return n;
}

inline kinoplan::Vec3 oracle_eval(const Trajectory& s, double x) {
  const auto n = cox_de_boor(s.knots(), s.degree(), x);
  kinoplan::Vec3 out = kinoplan::Vec3::Zero();
  for (int i = 0; i < s.size(); ++i) out += n[i] * s.control_points().col(i);
  return out;
}

// Distance from every voxel center to the nearest inflated voxel center, by exhaustive search.
inline std::vector<double> brute_force_field(const kinoplan::VoxelGrid& g) {
  using kinoplan::DistanceField;
  std::vector<kinoplan::Vec3> sites;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.inflated_layer()[k]) sites.push_back(g.unravel(k).cast<double>());
  std::vector<double> out(g.size(), DistanceField::kInfinity);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const kinoplan::Vec3 c = g.unravel(k).cast<double>();
    double best = DistanceField::kInfinity;
    for (const auto& s : sites) best = std::min(best, (s - c).squaredNorm());
    out[k] = std::sqrt(best) * g.resolution();
  }
  return out;
}

}  // namespace testing
