#include "kinoplan/traj_opt.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "kinoplan/lbfgs.hpp"

namespace kinoplan {

void OptimizerConfig::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) throw std::invalid_argument("optimizer: weights must be >= 0");
  if (!(d_thr > 0)) throw std::invalid_argument("optimizer: d_thr must be > 0");
  if (!(v_max > 0) || !(a_max > 0)) throw std::invalid_argument("optimizer: limits must be > 0");
  if (max_iters < 0) throw std::invalid_argument("optimizer: max_iters must be >= 0");
  if (grad_tol < 0) throw std::invalid_argument("optimizer: grad_tol must be >= 0");
}

namespace {

void require_free_points(const ControlPoints& q, int p) {
  if (p < 2) throw std::invalid_argument("optimizer: degree must be >= 2");
  if (q.cols() - 1 < 2 * p) throw std::invalid_argument("optimizer: need N >= 2p control points");
}

bool is_free(int i, int n, int p) { return i >= p && i <= n - p; }

}  // namespace

CostPart cost_smooth(const ControlPoints& q, int p) {
  require_free_points(q, p);
  const int n = static_cast<int>(q.cols()) - 1;
  CostPart out;
  out.gradient = ControlPoints::Zero(3, q.cols());
  for (int i = p - 1; i <= n - p + 1; ++i) {
    const Vec3 f = q.col(i + 1) - 2.0 * q.col(i) + q.col(i - 1);
    out.value += f.squaredNorm();
    if (is_free(i - 1, n, p)) out.gradient.col(i - 1) += 2.0 * f;
    if (is_free(i, n, p)) out.gradient.col(i) -= 4.0 * f;
    if (is_free(i + 1, n, p)) out.gradient.col(i + 1) += 2.0 * f;
  }
  return out;
}

CostPart cost_collision(const ControlPoints& q, const DistanceField& field, double d_thr, int p,
                        double out_of_field_weight, bool* out_of_field) {
  require_free_points(q, p);
  const int n = static_cast<int>(q.cols()) - 1;
  CostPart out;
  out.gradient = ControlPoints::Zero(3, q.cols());
  bool outside = false;
  for (int i = p; i <= n - p; ++i) {
    const Vec3 x = q.col(i);
    const FieldSample s = field.evaluate(x);
    if (!s.inside) {
      outside = true;
      const Vec3 offset = x - field.clamp_to_interior(x);
      out.value += out_of_field_weight * offset.squaredNorm();
      out.gradient.col(i) += 2.0 * out_of_field_weight * offset;
    }
    if (s.distance < d_thr) {
      const double e = s.distance - d_thr;
      out.value += e * e;
      out.gradient.col(i) += 2.0 * e * s.gradient;
    }
  }
  if (out_of_field) *out_of_field = outside;
  return out;
}

CostPart cost_dynamics(const ControlPoints& q, double dt, double v_max, double a_max, int p) {
  require_free_points(q, p);
  const int n = static_cast<int>(q.cols()) - 1;
  CostPart out;
  out.gradient = ControlPoints::Zero(3, q.cols());
  const double vm2 = v_max * v_max;
  const double am2 = a_max * a_max;
  const double inv = 1.0 / dt;
  const double inv2 = inv * inv;

  for (int i = p - 1; i <= n - p; ++i) {
    const Vec3 v = (q.col(i + 1) - q.col(i)) * inv;
    for (int ax = 0; ax < 3; ++ax) {
      const double e = v[ax] * v[ax] - vm2;
      if (e <= 0.0) continue;
      out.value += e * e;
      const double dv = 4.0 * e * v[ax] * inv;
      if (is_free(i + 1, n, p)) out.gradient(ax, i + 1) += dv;
      if (is_free(i, n, p)) out.gradient(ax, i) -= dv;
    }
  }
  for (int i = p - 2; i <= n - p; ++i) {
    const Vec3 a = (q.col(i + 2) - 2.0 * q.col(i + 1) + q.col(i)) * inv2;
    for (int ax = 0; ax < 3; ++ax) {
      const double e = a[ax] * a[ax] - am2;
      if (e <= 0.0) continue;
      out.value += e * e;
      const double da = 4.0 * e * a[ax] * inv2;
      if (is_free(i + 2, n, p)) out.gradient(ax, i + 2) += da;
      if (is_free(i + 1, n, p)) out.gradient(ax, i + 1) -= 2.0 * da;
      if (is_free(i, n, p)) out.gradient(ax, i) += da;
    }
  }
  return out;
}

Eigen::VectorXd pack(const ControlPoints& q, int p) {
  require_free_points(q, p);
  const Eigen::Index m = q.cols() - 2 * p;
  Eigen::VectorXd x(3 * m);
  for (Eigen::Index j = 0; j < m; ++j) x.segment<3>(3 * j) = q.col(p + j);
  return x;
}

void unpack(const Eigen::VectorXd& x, ControlPoints& q, int p) {
  const Eigen::Index m = q.cols() - 2 * p;
  if (x.size() != 3 * m) throw std::invalid_argument("unpack: size mismatch");
  for (Eigen::Index j = 0; j < m; ++j) q.col(p + j) = x.segment<3>(3 * j);
}

CostBreakdown total_cost(const ControlPoints& q, double dt, const DistanceField& field, const OptimizerConfig& cfg,
                         int p, bool* out_of_field) {
  const CostPart s = cost_smooth(q, p);
  const CostPart c = cost_collision(q, field, cfg.d_thr, p, cfg.out_of_field_weight, out_of_field);
  const CostPart d = cost_dynamics(q, dt, cfg.v_max, cfg.a_max, p);
  CostBreakdown out;
  out.smooth = s.value;
  out.collision = c.value;
  out.dynamics = d.value;
  out.total = cfg.lambda1 * s.value + cfg.lambda2 * c.value + cfg.lambda3 * d.value;
  out.gradient = cfg.lambda1 * s.gradient + cfg.lambda2 * c.gradient + cfg.lambda3 * d.gradient;
  return out;
}

Eigen::SparseMatrix<double> smoothness_hessian(int count, int p, double lambda1, double shift) {
  const int n = count - 1;
  const int m = n - 2 * p + 1;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = p - 1; i <= n - p + 1; ++i) {
    const int idx[3] = {i - 1, i, i + 1};
    const double w[3] = {1.0, -2.0, 1.0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (!is_free(idx[a], n, p) || !is_free(idx[b], n, p)) continue;
        for (int ax = 0; ax < 3; ++ax)
          t.emplace_back(3 * (idx[a] - p) + ax, 3 * (idx[b] - p) + ax, 2.0 * lambda1 * w[a] * w[b]);
      }
  }
  for (int k = 0; k < 3 * m; ++k) t.emplace_back(k, k, shift);
  Eigen::SparseMatrix<double> h(3 * m, 3 * m);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

std::string_view to_string(OptimizeStatus s) {
  switch (s) {
    case OptimizeStatus::Converged: return "converged";
    case OptimizeStatus::MaxIterations: return "max-iterations";
    case OptimizeStatus::Budget: return "budget";
    case OptimizeStatus::LineSearchFailed: return "line-search-failed";
  }
  return "unknown";
}

OptimizeResult optimize(const Trajectory& traj, const DistanceField& field, const OptimizerConfig& cfg) {
  cfg.validate();
  if (!traj.is_uniform()) throw std::invalid_argument("optimize: trajectory must have uniform knots");
  const int p = traj.degree();
  const double dt = traj.knot_span();
  const auto t0 = std::chrono::steady_clock::now();

  ControlPoints q = traj.control_points();
  Eigen::VectorXd x = pack(q, p);

  OptimizeResult out;
  auto fg = [&](const Eigen::VectorXd& xv, Eigen::VectorXd& g) {
    unpack(xv, q, p);
    const CostBreakdown c = total_cost(q, dt, field, cfg, p);
    g = pack(c.gradient, p);
    return c.total;
  };
  auto observe = [&](int k, const Eigen::VectorXd& xv, double) {
    unpack(xv, q, p);
    bool outside = false;
    const CostBreakdown c = total_cost(q, dt, field, cfg, p, &outside);
    out.out_of_field = out.out_of_field || outside;
    CostTraceEntry e;
    e.iteration = k;
    e.f_smooth = c.smooth;
    e.f_collision = c.collision;
    e.f_dynamics = c.dynamics;
    e.f_total = c.total;
    e.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.trace.push_back(e);
  };

  LbfgsOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.budget = cfg.budget;
  opt.grad_tol = cfg.grad_tol;

  // Initial inverse Hessian: the constant smoothness Hessian plus the
  // collision curvature of an active point with a unit gradient.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> h0;
  const double shift = 2.0 * cfg.lambda2;
  const bool use_h0 = cfg.precondition && shift > 0.0;
  if (use_h0) h0.compute(smoothness_hessian(static_cast<int>(q.cols()), p, cfg.lambda1, shift));
  auto precondition = [&](Eigen::VectorXd& v) {
    if (!use_h0 || h0.info() != Eigen::Success) return false;
    v = h0.solve(v);
    return true;
  };
  const LbfgsResult r = lbfgs_minimize(x, fg, observe, opt, precondition);
  out.iterations = r.iterations;
  switch (r.status) {
    case LbfgsStatus::Converged: out.status = OptimizeStatus::Converged; break;
    case LbfgsStatus::MaxIterations: out.status = OptimizeStatus::MaxIterations; break;
    case LbfgsStatus::Budget: out.status = OptimizeStatus::Budget; break;
    case LbfgsStatus::LineSearchFailed: out.status = OptimizeStatus::LineSearchFailed; break;
  }

  ControlPoints result = traj.control_points();
  unpack(x, result, p);
  out.trajectory = traj.with_control_points(std::move(result));
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<CostTraceEntry>& trace) {
  os << "iteration,f_smooth,f_collision,f_dynamics,f_total,wall_time\n";
  os.precision(12);
  for (const auto& e : trace)
    os << e.iteration << ',' << e.f_smooth << ',' << e.f_collision << ',' << e.f_dynamics << ',' << e.f_total << ','
       << e.wall_time << '\n';
}

}  // namespace kinoplan
