#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "kinoplan/bspline.hpp"
#include "kinoplan/distance_field.hpp"

using namespace kinoplan;
using Points = Trajectory::Points;
using Knots = Trajectory::Knots;
using testing::cox_de_boor;
using testing::oracle_eval;

namespace {

Points random_points(std::mt19937_64& rng, int n, double scale = 5.0) {
  Points q(3, n);
  for (int i = 0; i < n; ++i) q.col(i) = testing::random_vec(rng, -scale, scale);
  return q;
}

Trajectory random_nonuniform(std::mt19937_64& rng, int n, int degree = 3) {
  std::uniform_real_distribution<double> span(0.05, 0.6);
  Knots t(n + degree + 1);
  t[0] = -0.3;
  for (Eigen::Index i = 1; i < t.size(); ++i) t[i] = t[i - 1] + span(rng);
  return Trajectory(random_points(rng, n), t, degree);
}

double uniform_t(std::mt19937_64& rng, const Trajectory& s) {
  return std::uniform_real_distribution<double>(s.t_begin(), s.t_end())(rng);
}

}  // namespace

TEST_CASE("basis matrix") {
  const Eigen::MatrixXd m1 = basis_matrix(1);
  CHECK(m1.isApprox((Eigen::Matrix2d() << 1, 0, -1, 1).finished()));
  const Eigen::MatrixXd m3 = basis_matrix(3);
  Eigen::Matrix4d expected;
  expected << 1, 4, 1, 0, -3, 0, 3, 0, 3, -6, 3, 0, -1, 3, -3, 1;
  CHECK((m3 - expected / 6.0).cwiseAbs().maxCoeff() < 1e-15);
  for (int p = 1; p <= 5; ++p) {
    const Eigen::MatrixXd m = basis_matrix(p);
    CHECK(m.row(0).sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 1; i <= p; ++i) CHECK(std::abs(m.row(i).sum()) < 1e-12);
  }
  CHECK_THROWS_AS(basis_matrix(0), std::invalid_argument);
  CHECK_THROWS_AS(basis_matrix(6), std::invalid_argument);
}

TEST_CASE("linear spline interpolates") {
  std::mt19937_64 rng(1);
  const Trajectory s = Trajectory::uniform(random_points(rng, 6), 1, 0.5);
  for (int k = 0; k < 100; ++k) {
    const double t = uniform_t(rng, s);
    const int i = std::min(static_cast<int>(std::floor(t / 0.5)), 4);
    const double u = (t - 0.5 * i) / 0.5;
    const Vec3 lerp = (1 - u) * s.control_points().col(i) + u * s.control_points().col(i + 1);
    CHECK((s.eval(t) - lerp).norm() < 1e-12);
  }
}

TEST_CASE("matrix form matches de Boor") {
  std::mt19937_64 rng(2);
  for (int p = 1; p <= 5; ++p)
    for (int k = 0; k < 200; ++k) {
      const Trajectory s = Trajectory::uniform(random_points(rng, p + 4), p, 0.3, -1.0);
      const double t = uniform_t(rng, s);
      CHECK((s.eval_matrix(t) - s.eval_de_boor(t)).norm() < 1e-12);
      CHECK((s.eval_matrix(t) - oracle_eval(s, t)).norm() < 1e-12);
    }
}

TEST_CASE("non-uniform evaluation") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const Trajectory s = random_nonuniform(rng, 9);
    REQUIRE_FALSE(s.is_uniform());
    const double t = uniform_t(rng, s);
    CHECK((s.eval(t) - oracle_eval(s, t)).norm() < 1e-12);
  }
  const Trajectory s = random_nonuniform(rng, 9);
  CHECK((s.eval(s.t_end()) - oracle_eval(s, s.t_end())).norm() < 1e-12);
  CHECK_THROWS_AS(s.eval(s.t_end() + 0.1), std::out_of_range);
  CHECK_THROWS_AS(s.eval(s.t_begin() - 0.1), std::out_of_range);
  CHECK_THROWS_AS(s.eval_matrix(s.t_begin()), std::logic_error);
}

TEST_CASE("construction errors") {
  Points q = Points::Zero(3, 5);
  CHECK_THROWS_AS(Trajectory(q, Knots::LinSpaced(8, 0, 1), 3), std::invalid_argument);
  Knots bad = Knots::LinSpaced(9, 0, 1);
  bad[4] = 0.1;
  CHECK_THROWS_AS(Trajectory(q, bad, 3), std::invalid_argument);
  CHECK_THROWS_AS(Trajectory::uniform(q, 3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Trajectory(Points::Zero(3, 3), Knots::LinSpaced(7, 0, 1), 3), std::invalid_argument);
}

TEST_CASE("degenerate shapes") {
  const Vec3 c(1.5, -2.0, 0.25);
  const Trajectory same = Trajectory::uniform(c.replicate(1, 7), 3, 0.2);
  for (double t = same.t_begin(); t <= same.t_end(); t += 0.05) {
    CHECK((same.eval(t) - c).norm() < 1e-14);
    CHECK(same.eval(t, 1).norm() < 1e-12);
    CHECK(same.eval(t, 2).norm() < 1e-12);
  }
  Points line(3, 8);
  for (int i = 0; i < 8; ++i) line.col(i) = c + i * Vec3(0.3, 0.1, -0.2);
  const Trajectory l = Trajectory::uniform(line, 3, 0.25);
  for (double t = l.t_begin(); t <= l.t_end(); t += 0.05) {
    CHECK((l.eval(t, 1) - Vec3(1.2, 0.4, -0.8)).norm() < 1e-12);
    CHECK(l.eval(t, 2).norm() < 1e-10);
  }
}

TEST_CASE("derivatives") {
  std::mt19937_64 rng(4);
  SUBCASE("finite differences") {
    for (int k = 0; k < 200; ++k) {
      const Trajectory s = k % 2 ? Trajectory::uniform(random_points(rng, 8), 3, 0.4) : random_nonuniform(rng, 8);
      const double h = 1e-6;
      const double t = std::uniform_real_distribution<double>(s.t_begin() + h, s.t_end() - h)(rng);
      const Vec3 fd = (s.eval(t + h) - s.eval(t - h)) / (2 * h);
      CHECK((fd - s.eval(t, 1)).norm() <= 1e-6 * std::max(1.0, fd.norm()));
      const Vec3 fd2 = (s.eval(t + h, 1) - s.eval(t - h, 1)) / (2 * h);
      CHECK((fd2 - s.eval(t, 2)).norm() <= 1e-5 * std::max(1.0, fd2.norm()));
    }
  }
  SUBCASE("uniform control points") {
    Points q = Points::Zero(3, 6);
    for (int i = 0; i < 6; ++i) q(0, i) = i;
    const auto d = uniform_derivative_control_points<double>(q, 0.5);
    for (int i = 0; i < 5; ++i) CHECK(d.velocity.col(i) == Vec3(2, 0, 0));
    CHECK(d.acceleration.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("general form on uniform knots") {
    for (int k = 0; k < 100; ++k) {
      const double dt = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      const Trajectory s = Trajectory::uniform(random_points(rng, 9), 3, dt, 0.7);
      const auto u = uniform_derivative_control_points<double>(s.control_points(), dt);
      const auto g = derivative_control_points(s);
      CHECK((u.velocity - g.velocity).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, u.velocity.cwiseAbs().maxCoeff()));
      CHECK((u.acceleration - g.acceleration).cwiseAbs().maxCoeff() <=
            1e-12 * std::max(1.0, u.acceleration.cwiseAbs().maxCoeff()));
    }
  }
  SUBCASE("derivative spline") {
    for (int k = 0; k < 100; ++k) {
      const Trajectory s = k % 2 ? Trajectory::uniform(random_points(rng, 8), 3, 0.3) : random_nonuniform(rng, 8);
      const auto d = derivative_control_points(s);
      const Trajectory v(d.velocity, s.knots().segment(1, s.knots().size() - 2), 2);
      const Trajectory a(d.acceleration, s.knots().segment(2, s.knots().size() - 4), 1);
      const double t = uniform_t(rng, s);
      CHECK((v.eval(t) - s.eval(t, 1)).norm() < 1e-10);
      CHECK((a.eval(t) - s.eval(t, 2)).norm() < 1e-10);
      CHECK((v.eval_de_boor(t) - oracle_eval(s.derivative(), t)).norm() < 1e-10);
    }
  }
  SUBCASE("zero span rejected") {
    Knots t(11);
    t << 0, 1, 2, 3, 4, 4, 4, 5, 6, 7, 8;
    const Trajectory s(random_points(rng, 7), t, 3);
    CHECK_THROWS_AS(derivative_control_points(s), std::domain_error);
  }
}

TEST_CASE("affine invariance and convex hull") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10000; ++k) {
    const Trajectory s = k % 2 ? Trajectory::uniform(random_points(rng, 7), 3, 0.2) : random_nonuniform(rng, 7);
    const double t = uniform_t(rng, s);
    if (k < 1000) {
      const Vec3 w = testing::random_vec(rng, -10, 10);
      const Trajectory moved = s.with_control_points(s.control_points().colwise() + w);
      CHECK((moved.eval(t) - (s.eval(t) + w)).norm() < 1e-12);
    }
    // Basis weights of the supporting points are nonnegative, sum to one and reproduce the point.
    const auto n = cox_de_boor(s.knots(), 3, std::min(std::max(t, s.t_begin()), s.t_end()));
    const int m = s.span(t);
    double sum = 0.0;
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < s.size(); ++i) {
      if (i < m - 3 || i > m) {
        REQUIRE(std::abs(n[i]) <= 1e-9);
        continue;
      }
      REQUIRE(n[i] >= -1e-9);
      sum += n[i];
      p += n[i] * s.control_points().col(i);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK((p - s.eval(t)).norm() <= 1e-9);
  }
}

TEST_CASE("jerk integral") {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 20; ++k) {
    const Trajectory s = k % 2 ? Trajectory::uniform(random_points(rng, 9), 3, 0.3) : random_nonuniform(rng, 9);
    // Jerk is constant on each span: difference the acceleration at span ends.
    double sum = 0.0;
    const auto& t = s.knots();
    for (int m = 3; m + 4 < t.size(); ++m) {
      const double a = t[m], b = t[m + 1];
      const double h = 1e-3 * (b - a);
      const Vec3 j = (s.eval(b - h, 2) - s.eval(a + h, 2)) / (b - a - 2 * h);
      sum += j.squaredNorm() * (b - a);
    }
    CHECK(jerk_integral(s) == doctest::Approx(sum).epsilon(1e-6));
  }
  Points line(3, 6);
  for (int i = 0; i < 6; ++i) line.col(i) = Vec3(i, 0, 0);
  CHECK(jerk_integral(Trajectory::uniform(line, 3, 0.5)) == doctest::Approx(0.0));
}

TEST_CASE("fit from samples") {
  std::mt19937_64 rng(7);
  SUBCASE("straight line") {
    const Vec3 p0(1, 2, 3), v(1.5, -0.5, 0.25);
    std::vector<TimedState> samples;
    for (int k = 0; k <= 10; ++k) samples.push_back({0.15 * k, {p0 + v * 0.15 * k, v}});
    const Trajectory s = fit_from_samples(samples, 0.15, samples.front().state, samples.back().state);
    for (double t = s.t_begin(); t <= s.t_end(); t += 0.01) CHECK((s.eval(t) - (p0 + v * t)).norm() < 1e-9);
    const auto& q = s.control_points();
    for (int i = 1; i < s.size(); ++i) CHECK((q.col(i) - q.col(i - 1) - v * 0.15).norm() < 1e-9);
  }
  SUBCASE("round trip") {
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 6 + trial % 20;
      const double dt = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
      const double t0 = std::uniform_real_distribution<double>(-2, 2)(rng);
      const Trajectory orig = Trajectory::uniform(random_points(rng, n), 3, dt, t0);
      std::vector<TimedState> samples;
      for (int k = 0; k <= n - 3; ++k) {
        const double t = t0 + k * dt;
        samples.push_back({t, {orig.eval(t), orig.eval(t, 1)}});
      }
      const Trajectory fit = fit_from_samples(samples, dt, samples.front().state, samples.back().state);
      REQUIRE(fit.size() == n);
      CHECK((fit.control_points() - orig.control_points()).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((fit.knots() - orig.knots()).cwiseAbs().maxCoeff() < 1e-12);
      for (const auto& s : samples) CHECK((fit.eval(s.time) - s.state.position).norm() < 1e-8);
      CHECK((fit.eval(fit.t_begin(), 1) - samples.front().state.velocity).norm() < 1e-8);
      CHECK((fit.eval(fit.t_end(), 1) - samples.back().state.velocity).norm() < 1e-8);
    }
  }
  SUBCASE("minimal and invalid") {
    std::vector<TimedState> samples;
    for (int k = 0; k < 4; ++k) samples.push_back({0.2 * k, {testing::random_vec(rng, -1, 1), Vec3::Zero()}});
    const Trajectory s = fit_from_samples(samples, 0.2, samples.front().state, samples.back().state);
    CHECK(s.size() == 6);
    for (const auto& x : samples) CHECK((s.eval(x.time) - x.state.position).norm() < 1e-10);
    samples.pop_back();
    CHECK_THROWS_AS(fit_from_samples(samples, 0.2, samples.front().state, samples.back().state), std::invalid_argument);
    samples.push_back({0.7, {}});
    CHECK_THROWS_AS(fit_from_samples(samples, 0.2, samples.front().state, samples.back().state), std::invalid_argument);
  }
}

TEST_CASE("hull safety") {
  VoxelGrid g(Vec3::Zero(), 0.1, Vec3i(60, 60, 30));
  g.add_obstacle({30, 30, 15});
  const DistanceField f = DistanceField::build(g, 5.0);
  const Vec3 site = g.index_to_world({30, 30, 15});

  SUBCASE("far points with small gaps") {
    Points q(3, 10);
    for (int i = 0; i < 10; ++i) q.col(i) = site + Vec3(-0.9 + 0.2 * i, 1.0, 0.0);
    const auto verdicts = check_hull_safety(Trajectory::uniform(q, 3, 0.1), f);
    CHECK(verdicts.size() == 7);
    CHECK(all_safe(verdicts));
    for (const auto& v : verdicts) CHECK(v.max_gap == doctest::Approx(0.2));
  }
  SUBCASE("point inside an obstacle") {
    Points q(3, 6);
    for (int i = 0; i < 6; ++i) q.col(i) = site + Vec3(-0.5 + 0.2 * i, 0.05, 0.0);
    const auto verdicts = check_hull_safety(Trajectory::uniform(q, 3, 0.1), f);
    CHECK_FALSE(all_safe(verdicts));
    CHECK_FALSE(verdicts.front().safe);
  }
  SUBCASE("large gaps") {
    Points q(3, 6);
    for (int i = 0; i < 6; ++i) q.col(i) = site + Vec3(-2.5 + 1.0 * i, 1.5, 0.0);
    CHECK_FALSE(all_safe(check_hull_safety(Trajectory::uniform(q, 3, 0.1), f)));
  }
  SUBCASE("safe segments are free under dense sampling") {
    std::mt19937_64 rng(8);
    WorldSpec spec;
    spec.extent = Vec3(12, 12, 4);
    spec.obstacle_count = 15;
    int safe = 0;
    for (std::uint64_t seed = 0; safe < 20 && seed < 200; ++seed) {
      spec.seed = seed;
      const VoxelGrid w = generate_world(spec, 0.2);
      const DistanceField wf = DistanceField::build(w, 5.0);
      Points q(3, 8);
      q.col(0) = testing::random_in_box(rng, Vec3(1, 1, 1), Vec3(11, 11, 3));
      for (int i = 1; i < 8; ++i)
        q.col(i) = (q.col(i - 1) + testing::random_vec(rng, -0.15, 0.15)).cwiseMax(Vec3(0.5, 0.5, 0.5)).cwiseMin(Vec3(11.5, 11.5, 3.5));
      const Trajectory s = Trajectory::uniform(q, 3, 0.2);
      const auto verdicts = check_hull_safety(s, wf);
      for (const auto& v : verdicts) {
        if (!v.safe) continue;
        ++safe;
        const double a = s.knots()[v.first + 3], b = s.knots()[v.first + 4];
        for (int k = 0; k < 1000; ++k) REQUIRE(w.is_free(s.eval(a + (b - a) * k / 999.0)));
      }
    }
    CHECK(safe >= 20);
  }
}
