#pragma once

#include <Eigen/Core>

namespace kinoplan {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

// Double-integrator state: position (m) and velocity (m/s).
struct State {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct TimedState {
  double time = 0.0;
  State state;
};

// Axis-aligned box in world coordinates.
struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Box expanded(double margin) const {
    return {min.array() - margin, max.array() + margin};
  }
  bool intersects(const Box& o) const {
    return (min.array() < o.max.array()).all() && (o.min.array() < max.array()).all();
  }
};

}  // namespace kinoplan
