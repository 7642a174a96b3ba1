#include "kinoplan/bspline.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

#include "kinoplan/distance_field.hpp"

namespace kinoplan {

std::vector<HullVerdict> check_hull_safety(const Trajectory& traj, const DistanceField& field) {
  const int p = traj.degree();
  const auto& q = traj.control_points();
  const double margin = std::sqrt(3.0) * field.resolution();

  std::vector<double> clearance(q.cols());
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const FieldSample s = field.evaluate(q.col(i));
    clearance[i] = s.inside ? s.distance - margin : -std::numeric_limits<double>::infinity();
  }

  std::vector<HullVerdict> out;
  for (int first = 0; first + p < q.cols(); ++first) {
    HullVerdict v;
    v.first = first;
    v.clearance = clearance[first];
    for (int j = first; j <= first + p; ++j) v.clearance = std::min(v.clearance, clearance[j]);
    for (int j = first; j < first + p; ++j) v.max_gap = std::max(v.max_gap, (q.col(j + 1) - q.col(j)).norm());
    v.safe = v.clearance > 0.0 && (p == 0 || v.max_gap < v.clearance / p);
    out.push_back(v);
  }
  return out;
}

bool all_safe(const std::vector<HullVerdict>& verdicts) {
  for (const auto& v : verdicts)
    if (!v.safe) return false;
  return true;
}

Trajectory fit_from_samples(const std::vector<TimedState>& samples, double dt, const State& start,
                            const State& end) {
  if (samples.size() < 4) throw std::invalid_argument("fit_from_samples: need at least 4 samples");
  if (!(dt > 0.0)) throw std::invalid_argument("fit_from_samples: dt must be > 0");
  const int k = static_cast<int>(samples.size()) - 1;
  for (int i = 1; i <= k; ++i) {
    const double step = samples[i].time - samples[i - 1].time;
    if (std::abs(step - dt) > 1e-6 * dt) throw std::invalid_argument("fit_from_samples: samples are not spaced by dt");
  }

  const int n = k + 3;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(3 * n);
  Eigen::MatrixXd rhs(n, 3);
  for (int i = 0; i <= k; ++i) {
    triplets.emplace_back(i, i, 1.0 / 6.0);
    triplets.emplace_back(i, i + 1, 4.0 / 6.0);
    triplets.emplace_back(i, i + 2, 1.0 / 6.0);
    rhs.row(i) = samples[i].state.position.transpose();
  }
  triplets.emplace_back(k + 1, 0, -0.5 / dt);
  triplets.emplace_back(k + 1, 2, 0.5 / dt);
  rhs.row(k + 1) = start.velocity.transpose();
  triplets.emplace_back(k + 2, k, -0.5 / dt);
  triplets.emplace_back(k + 2, k + 2, 0.5 / dt);
  rhs.row(k + 2) = end.velocity.transpose();

  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("fit_from_samples: singular system");
  const Eigen::MatrixXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw std::runtime_error("fit_from_samples: singular system");
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if ((a * x - rhs).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::runtime_error("fit_from_samples: ill-conditioned system");

  Trajectory::Points q = x.transpose();
  return Trajectory::uniform(std::move(q), 3, dt, samples.front().time);
}

double jerk_integral(const Trajectory& traj) {
  if (traj.degree() != 3) throw std::invalid_argument("jerk_integral: cubic splines only");
  const Trajectory jerk = traj.derivative().derivative().derivative();
  const auto& t = jerk.knots();
  const auto& c = jerk.control_points();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.cols(); ++i) sum += c.col(i).squaredNorm() * (t[i + 1] - t[i]);
  return sum;
}

}  // namespace kinoplan
