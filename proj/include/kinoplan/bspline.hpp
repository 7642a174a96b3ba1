#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kinoplan/types.hpp"

namespace kinoplan {

class DistanceField;

/// Constant matrix M of the power-basis form p(s) = [1 s ... s^p] M [Q_{m-p} ... Q_m]^T
/// for uniform B-splines of degree p (1 <= p <= 5).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis_matrix(int degree) {
  if (degree < 1 || degree > 5) throw std::invalid_argument("basis_matrix: degree must be in [1, 5]");
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  double factorial = 1.0;
  for (int i = 2; i <= degree; ++i) factorial *= i;
  const int k = degree + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double sum = 0.0;
      for (int s = j; s < k; ++s) {
        const int e = degree - i;
        const double base = degree - s;
        const double power = e == 0 ? 1.0 : std::pow(base, e);
        sum += ((s - j) % 2 ? -1.0 : 1.0) * binom(k, s - j) * power;
      }
      m(i, j) = static_cast<Scalar>(binom(degree, i) * sum / factorial);
    }
  return m;
}

/// B-spline trajectory parameterized by time.
///
/// Degree p, control points Q_0..Q_N (columns), knots t_0..t_M with
/// M = N + p + 1. The curve is defined on [t_p, t_{M-p}]. Uniform splines are
/// evaluated with the constant basis matrix; non-uniform ones with de Boor.
template <typename Scalar = double>
class BSpline {
 public:
  using Points = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
  using Knots = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Point = Eigen::Matrix<Scalar, 3, 1>;

  BSpline() = default;

  BSpline(Points control_points, Knots knots, int degree)
      : degree_(degree), points_(std::move(control_points)), knots_(std::move(knots)) {
    if (degree_ < 0) throw std::invalid_argument("BSpline: negative degree");
    if (points_.cols() < degree_ + 1) throw std::invalid_argument("BSpline: need at least p+1 control points");
    if (knots_.size() != points_.cols() + degree_ + 1)
      throw std::invalid_argument("BSpline: knot count must equal N + p + 2");
    for (Eigen::Index i = 1; i < knots_.size(); ++i)
      if (knots_[i] < knots_[i - 1]) throw std::invalid_argument("BSpline: knots must be nondecreasing");
    if (!(t_end() > t_begin())) throw std::invalid_argument("BSpline: empty domain");
    update_uniformity();
  }

  /// Knots t_m = t_begin + (m - p) dt, so the domain starts at `t_begin`.
  static BSpline uniform(Points control_points, int degree, Scalar dt, Scalar t_begin = Scalar(0)) {
    if (!(dt > Scalar(0))) throw std::invalid_argument("BSpline::uniform: dt must be > 0");
    const Eigen::Index m = control_points.cols() + degree + 1;
    Knots knots(m);
    for (Eigen::Index i = 0; i < m; ++i) knots[i] = t_begin + Scalar(i - degree) * dt;
    return BSpline(std::move(control_points), std::move(knots), degree);
  }

  int degree() const { return degree_; }
  const Points& control_points() const { return points_; }
  const Knots& knots() const { return knots_; }
  /// Number of control points, N + 1.
  int size() const { return static_cast<int>(points_.cols()); }
  bool is_uniform() const { return uniform_; }
  /// Common knot span; meaningful when is_uniform().
  Scalar knot_span() const { return knots_[1] - knots_[0]; }

  Scalar t_begin() const { return knots_[degree_]; }
  Scalar t_end() const { return knots_[knots_.size() - 1 - degree_]; }
  Scalar duration() const { return t_end() - t_begin(); }

  /// Position (order 0) or time derivative of the given order at t.
  Point eval(Scalar t, int order = 0) const {
    return uniform_ ? eval_matrix(t, order) : eval_de_boor(t, order);
  }

  Point eval_matrix(Scalar t, int order = 0) const {
    if (!uniform_) throw std::logic_error("BSpline::eval_matrix: knots are not uniform");
    if (order < 0) throw std::invalid_argument("BSpline::eval: negative order");
    if (order > degree_) return Point::Zero();
    const int m = span(t);
    const Scalar dt = knot_span();
    const Scalar s = (clamp_domain(t) - knots_[m]) / dt;
    if (basis_.rows() != degree_ + 1) basis_ = basis_matrix<Scalar>(degree_);
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(degree_ + 1);
    for (int j = order; j <= degree_; ++j) {
      Scalar c(1);
      for (int q = 0; q < order; ++q) c *= Scalar(j - q);
      row[j] = c * std::pow(s, j - order);
    }
    row /= std::pow(dt, order);
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> weights = row * basis_;
    return points_.middleCols(m - degree_, degree_ + 1) * weights.transpose();
  }

  Point eval_de_boor(Scalar t, int order = 0) const {
    if (order < 0) throw std::invalid_argument("BSpline::eval: negative order");
    if (order > degree_) return Point::Zero();
    if (order > 0) {
      // The domain of the derivative spline is the same interval.
      BSpline d = derivative();
      for (int k = 1; k < order; ++k) d = d.derivative();
      return d.eval_de_boor(clamp_domain(t), 0);
    }
    const Scalar x = clamp_domain(t);
    const int k = span(t);
    const int p = degree_;
    Points d = points_.middleCols(k - p, p + 1);
    for (int r = 1; r <= p; ++r)
      for (int j = p; j >= r; --j) {
        const Scalar lo = knots_[j + k - p];
        const Scalar hi = knots_[j + 1 + k - r];
        const Scalar a = (x - lo) / (hi - lo);
        d.col(j) = (Scalar(1) - a) * d.col(j - 1) + a * d.col(j);
      }
    return d.col(p);
  }

  /// Derivative spline: degree p-1, control points p (Q_{i+1} - Q_i) / (t_{i+p+1} - t_{i+1}),
  /// knots t_1..t_{M-1}.
  BSpline derivative() const {
    if (degree_ < 1) throw std::logic_error("BSpline::derivative: degree 0");
    const int n = size() - 1;
    Points v(3, n);
    for (int i = 0; i < n; ++i) {
      const Scalar den = knots_[i + degree_ + 1] - knots_[i + 1];
      if (!(den > Scalar(0))) throw std::domain_error("BSpline::derivative: zero knot span");
      v.col(i) = Scalar(degree_) * (points_.col(i + 1) - points_.col(i)) / den;
    }
    return BSpline(std::move(v), knots_.segment(1, knots_.size() - 2), degree_ - 1);
  }

  BSpline with_control_points(Points points) const { return BSpline(std::move(points), knots_, degree_); }
  BSpline with_knots(Knots knots) const { return BSpline(points_, std::move(knots), degree_); }

  /// Index m of the span [t_m, t_{m+1}) containing t, with p <= m <= M-p-1.
  int span(Scalar t) const {
    const Scalar x = clamp_domain(t);
    const int lo = degree_;
    const int hi = static_cast<int>(knots_.size()) - 2 - degree_;
    int m = lo;
    while (m < hi && knots_[m + 1] <= x) ++m;
    return m;
  }

 private:
  Scalar clamp_domain(Scalar t) const {
    const Scalar tol = Scalar(1e-9) * std::max(Scalar(1), std::abs(duration()));
    if (t < t_begin() - tol || t > t_end() + tol || std::isnan(t))
      throw std::out_of_range("BSpline::eval: t outside the defined domain");
    return std::min(std::max(t, t_begin()), t_end());
  }

  void update_uniformity() {
    const Scalar h = knots_[1] - knots_[0];
    uniform_ = h > Scalar(0);
    for (Eigen::Index i = 1; uniform_ && i + 1 < knots_.size(); ++i)
      uniform_ = std::abs((knots_[i + 1] - knots_[i]) - h) <= Scalar(1e-9) * h;
  }

  int degree_ = 0;
  Points points_;
  Knots knots_;
  bool uniform_ = false;
  mutable Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis_;
};

template <typename Scalar = double>
struct DerivativeControlPoints {
  typename BSpline<Scalar>::Points velocity;      ///< N columns
  typename BSpline<Scalar>::Points acceleration;  ///< N-1 columns
};

/// Uniform-knot form: V_i = (Q_{i+1} - Q_i)/dt, A_i = (V_{i+1} - V_i)/dt.
template <typename Scalar>
DerivativeControlPoints<Scalar> uniform_derivative_control_points(
    const typename BSpline<Scalar>::Points& q, Scalar dt) {
  DerivativeControlPoints<Scalar> out;
  const Eigen::Index n = q.cols() - 1;
  out.velocity = (q.rightCols(n) - q.leftCols(n)) / dt;
  out.acceleration = (out.velocity.rightCols(n - 1) - out.velocity.leftCols(n - 1)) / dt;
  return out;
}

/// General-knot form:
///   V'_i = p (Q_{i+1} - Q_i) / (t_{i+p+1} - t_{i+1})
///   A'_i = (p-1) (V'_{i+1} - V'_i) / (t_{i+p+1} - t_{i+2})
template <typename Scalar>
DerivativeControlPoints<Scalar> derivative_control_points(const BSpline<Scalar>& spline) {
  const int p = spline.degree();
  const int n = spline.size() - 1;
  if (p < 2 || n < p) throw std::invalid_argument("derivative_control_points: need N >= p >= 2");
  const auto& q = spline.control_points();
  const auto& t = spline.knots();
  DerivativeControlPoints<Scalar> out;
  out.velocity.resize(3, n);
  for (int i = 0; i < n; ++i) {
    const Scalar den = t[i + p + 1] - t[i + 1];
    if (!(den > Scalar(0))) throw std::domain_error("derivative_control_points: zero knot span");
    out.velocity.col(i) = Scalar(p) * (q.col(i + 1) - q.col(i)) / den;
  }
  out.acceleration.resize(3, n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const Scalar den = t[i + p + 1] - t[i + 2];
    if (!(den > Scalar(0))) throw std::domain_error("derivative_control_points: zero knot span");
    out.acceleration.col(i) = Scalar(p - 1) * (out.velocity.col(i + 1) - out.velocity.col(i)) / den;
  }
  return out;
}

using Trajectory = BSpline<double>;

struct HullVerdict {
  int first = 0;            ///< hull spans control points first..first+p
  double clearance = 0.0;   ///< d_c: smallest certified clearance of its control points
  double max_gap = 0.0;     ///< largest consecutive control-point gap inside the hull
  bool safe = false;
};

/// Convex-hull safety certificate, one verdict per hull of p+1 consecutive
/// control points: SAFE iff d_c > 0 and every gap < d_c / p.
///
/// d_c is measured to occupied voxel volumes rather than centers: the
/// interpolated field value minus sqrt(3) * resolution (half a voxel diagonal
/// for interpolation error plus half a diagonal for the voxel extent).
std::vector<HullVerdict> check_hull_safety(const Trajectory& traj, const DistanceField& field);
bool all_safe(const std::vector<HullVerdict>& verdicts);

/// Uniform cubic through sampled positions with boundary velocities.
///
/// Samples must be uniformly spaced by `dt` (at least 4). Solves for K+3
/// control points so that the spline passes through every sample position
/// and matches the start/end velocities. Throws on singular systems.
Trajectory fit_from_samples(const std::vector<TimedState>& samples, double dt,
                            const State& start, const State& end);

/// integral of |jerk|^2 dt over the domain (exact for cubic splines).
double jerk_integral(const Trajectory& traj);

}  // namespace kinoplan
