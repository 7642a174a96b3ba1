#include "kinoplan/distance_field.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kinoplan {

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas rooted at (q, f[q]) sampled on 0..n-1.
void transform_1d(const double* f, int n, double* d, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    auto meet = [&](int p) { return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p)); };
    double s = meet(v[k]);
    while (s <= z[k]) s = meet(v[--k]);
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

void squared_distance_transform(std::vector<double>& f, const Vec3i& dims) {
  const int nmax = dims.maxCoeff();
  std::vector<double> in(nmax), out(nmax), z(nmax + 1);
  std::vector<int> v(nmax);
  const std::size_t sx = 1;
  const std::size_t sy = static_cast<std::size_t>(dims.x());
  const std::size_t sz = sy * static_cast<std::size_t>(dims.y());
  const std::size_t strides[3] = {sx, sy, sz};

  for (int axis = 0; axis < 3; ++axis) {
    const int n = dims[axis];
    if (n == 1) continue;
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    for (int j = 0; j < dims[a2]; ++j) {
      for (int i = 0; i < dims[a1]; ++i) {
        const std::size_t base = i * strides[a1] + j * strides[a2];
        for (int q = 0; q < n; ++q) in[q] = f[base + q * strides[axis]];
        transform_1d(in.data(), n, out.data(), v.data(), z.data());
        for (int q = 0; q < n; ++q) f[base + q * strides[axis]] = out[q];
      }
    }
  }
}

DistanceField DistanceField::build(const VoxelGrid& g, double cap) {
  DistanceField field;
  field.origin_ = g.origin();
  field.resolution_ = g.resolution();
  field.dims_ = g.dims();
  field.cap_ = cap;

  const auto& occ = g.inflated_layer();
  std::vector<double> f(occ.size());
  for (std::size_t k = 0; k < occ.size(); ++k) f[k] = occ[k] ? 0.0 : kFar;
  squared_distance_transform(f, g.dims());

  field.distances_.resize(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double d = f[k] >= 0.5 * kFar ? kInfinity : g.resolution() * std::sqrt(f[k]);
    field.distances_[k] = std::min(d, cap);
  }
  return field;
}

void DistanceField::update_window(const VoxelGrid& g, const Vec3i& lo, const Vec3i& hi) {
  const int margin = std::isfinite(cap_)
                         ? static_cast<int>(std::ceil(cap_ / resolution_)) + 1
                         : dims_.maxCoeff();
  Vec3i wlo, whi;
  for (int a = 0; a < 3; ++a) {
    wlo[a] = std::max(0, std::min(lo[a], hi[a]) - margin);
    whi[a] = std::min(dims_[a] - 1, std::max(lo[a], hi[a]) + margin);
  }
  const Vec3i wdims = whi - wlo + Vec3i::Ones();
  std::vector<double> f(static_cast<std::size_t>(wdims.x()) * wdims.y() * wdims.z());
  std::size_t k = 0;
  for (int z = wlo.z(); z <= whi.z(); ++z)
    for (int y = wlo.y(); y <= whi.y(); ++y)
      for (int x = wlo.x(); x <= whi.x(); ++x) f[k++] = g.occupied(Vec3i(x, y, z)) ? 0.0 : kFar;
  squared_distance_transform(f, wdims);
  k = 0;
  for (int z = wlo.z(); z <= whi.z(); ++z)
    for (int y = wlo.y(); y <= whi.y(); ++y)
      for (int x = wlo.x(); x <= whi.x(); ++x, ++k) {
        const double d = f[k] >= 0.5 * kFar ? kInfinity : resolution_ * std::sqrt(f[k]);
        double& cur = distances_[linear(Vec3i(x, y, z))];
        cur = std::min(cur, std::min(d, cap_));
      }
}

bool DistanceField::in_interior(const Vec3& p) const {
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] - origin_[a]) / resolution_ - 0.5;
    if (u < 0.0 || u > dims_[a] - 1) return false;
  }
  return true;
}

Vec3 DistanceField::clamp_to_interior(const Vec3& p) const {
  Vec3 q;
  for (int a = 0; a < 3; ++a) {
    const double lo = origin_[a] + 0.5 * resolution_;
    const double hi = origin_[a] + (dims_[a] - 0.5) * resolution_;
    q[a] = std::clamp(p[a], lo, hi);
  }
  return q;
}

FieldSample DistanceField::evaluate(const Vec3& p) const {
  FieldSample out;
  Vec3i i0;
  Vec3 frac;
  int step[3];
  for (int a = 0; a < 3; ++a) {
    double u = (p[a] - origin_[a]) / resolution_ - 0.5;
    const double umax = dims_[a] - 1;
    if (!(u >= 0.0) || u > umax) {
      out.inside = false;
      u = std::clamp(std::isnan(u) ? 0.0 : u, 0.0, umax);
    }
    if (dims_[a] == 1) {
      i0[a] = 0;
      frac[a] = 0.0;
      step[a] = 0;
      continue;
    }
    int i = static_cast<int>(std::floor(u));
    i = std::min(i, dims_[a] - 2);
    i0[a] = i;
    frac[a] = u - i;
    step[a] = 1;
  }

  double c[2][2][2];
  bool finite = true;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const Vec3i idx(i0.x() + dx * step[0], i0.y() + dy * step[1], i0.z() + dz * step[2]);
        c[dx][dy][dz] = distances_[linear(idx)];
        finite = finite && std::isfinite(c[dx][dy][dz]);
      }
  if (!finite) {
    out.distance = kInfinity;
    return out;
  }

  const double x = frac.x(), y = frac.y(), z = frac.z();
  // Interpolate along x, then y, then z.
  const double c00 = c[0][0][0] * (1 - x) + c[1][0][0] * x;
  const double c10 = c[0][1][0] * (1 - x) + c[1][1][0] * x;
  const double c01 = c[0][0][1] * (1 - x) + c[1][0][1] * x;
  const double c11 = c[0][1][1] * (1 - x) + c[1][1][1] * x;
  const double c0 = c00 * (1 - y) + c10 * y;
  const double c1 = c01 * (1 - y) + c11 * y;
  out.distance = c0 * (1 - z) + c1 * z;

  if (out.inside) {
    const double inv = 1.0 / resolution_;
    const double dx00 = c[1][0][0] - c[0][0][0];
    const double dx10 = c[1][1][0] - c[0][1][0];
    const double dx01 = c[1][0][1] - c[0][0][1];
    const double dx11 = c[1][1][1] - c[0][1][1];
    const double gx = ((dx00 * (1 - y) + dx10 * y) * (1 - z) + (dx01 * (1 - y) + dx11 * y) * z);
    const double gy = (c10 - c00) * (1 - z) + (c11 - c01) * z;
    const double gz = c1 - c0;
    out.gradient = Vec3(step[0] ? gx * inv : 0.0, step[1] ? gy * inv : 0.0, step[2] ? gz * inv : 0.0);
  }
  return out;
}

void DistanceField::write_debug(std::ostream& os) const {
  os << "edf dims " << dims_.x() << ' ' << dims_.y() << ' ' << dims_.z() << " res " << resolution_
     << " origin " << origin_.x() << ' ' << origin_.y() << ' ' << origin_.z() << '\n';
  for (double d : distances_) {
    const float v = static_cast<float>(d);
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
}

}  // namespace kinoplan
