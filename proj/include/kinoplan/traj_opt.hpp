#pragma once

#include <Eigen/SparseCore>

#include <iosfwd>
#include <string_view>
#include <vector>

#include "kinoplan/bspline.hpp"
#include "kinoplan/distance_field.hpp"

namespace kinoplan {

struct OptimizerConfig {
  double lambda1 = 10.0;  ///< smoothness
  double lambda2 = 0.8;   ///< collision
  double lambda3 = 0.01;  ///< dynamic feasibility
  double d_thr = 0.5;     ///< clearance below which control points are repelled (m)
  double v_max = 3.0;
  double a_max = 2.0;
  int max_iters = 100;
  double budget = 0.0;    ///< seconds; <= 0 means iteration-limited only
  double grad_tol = 1e-6;
  double out_of_field_weight = 1000.0;
  bool precondition = true;  ///< seed L-BFGS with the smoothness Hessian

  void validate() const;
};

using ControlPoints = Trajectory::Points;

/// A cost term and its gradient with respect to every control point; the
/// columns of fixed boundary points are zero.
struct CostPart {
  double value = 0.0;
  ControlPoints gradient;
};

/// Elastic-band smoothness over second differences touching the free points.
CostPart cost_smooth(const ControlPoints& q, int degree = 3);

/// Quadratic repulsion of free control points closer than d_thr. Points
/// outside the field are pulled back toward it; `out_of_field` reports that.
CostPart cost_collision(const ControlPoints& q, const DistanceField& field, double d_thr, int degree = 3,
                        double out_of_field_weight = 1000.0, bool* out_of_field = nullptr);

/// Per-axis penalties (x^2 - lim^2)^2 on velocity and acceleration control
/// points exceeding the limits, for uniform knot span dt.
CostPart cost_dynamics(const ControlPoints& q, double dt, double v_max, double a_max, int degree = 3);

/// Free control points Q_p..Q_{N-p} flattened column-major.
Eigen::VectorXd pack(const ControlPoints& q, int degree = 3);
/// Writes `x` back into the free columns of `q`.
void unpack(const Eigen::VectorXd& x, ControlPoints& q, int degree = 3);

struct CostTraceEntry {
  int iteration = 0;
  double f_smooth = 0.0;
  double f_collision = 0.0;
  double f_dynamics = 0.0;  ///< f_v + f_a
  double f_total = 0.0;
  double wall_time = 0.0;   ///< seconds since the start of optimize
};

enum class OptimizeStatus { Converged, MaxIterations, Budget, LineSearchFailed };
std::string_view to_string(OptimizeStatus s);

struct OptimizeResult {
  Trajectory trajectory;
  std::vector<CostTraceEntry> trace;
  OptimizeStatus status = OptimizeStatus::MaxIterations;
  int iterations = 0;
  bool out_of_field = false;
};

struct CostBreakdown {
  double smooth = 0.0, collision = 0.0, dynamics = 0.0, total = 0.0;
  ControlPoints gradient;
};

CostBreakdown total_cost(const ControlPoints& q, double dt, const DistanceField& field, const OptimizerConfig& cfg,
                         int degree = 3, bool* out_of_field = nullptr);

/// Hessian of lambda1 * f_s over the packed free points plus `shift` * I.
Eigen::SparseMatrix<double> smoothness_hessian(int count, int degree, double lambda1, double shift);

/// Refines the free control points of a uniform spline; boundary points are kept.
OptimizeResult optimize(const Trajectory& traj, const DistanceField& field, const OptimizerConfig& cfg);

void write_trace_csv(std::ostream& os, const std::vector<CostTraceEntry>& trace);

}  // namespace kinoplan
