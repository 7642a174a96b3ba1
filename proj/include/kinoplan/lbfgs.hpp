#pragma once

#include <Eigen/Core>

#include <chrono>
#include <deque>
#include <limits>
#include <cmath>
#include <vector>

namespace kinoplan {

struct LbfgsOptions {
  int history = 8;
  int max_iters = 100;
  double budget = 0.0;  ///< seconds; <= 0 disables the wall-clock limit
  double grad_tol = 1e-6;
  double armijo = 1e-4;
  int max_backtracks = 40;
  /// Curvature constant of the weak Wolfe condition; <= 0 accepts on
  /// sufficient decrease alone.
  double wolfe = 0.9;
};

enum class LbfgsStatus { Converged, MaxIterations, Budget, LineSearchFailed };

struct LbfgsResult {
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  int iterations = 0;
  double value = 0.0;
};

/// Limited-memory BFGS with Armijo backtracking.
///
/// `fg(x, grad)` returns f(x) and writes the gradient. `on_iter(k, x, f)` is
/// called for the start point (k = 0) and after every accepted step. On
/// return `x` holds the best iterate.
struct ScaledIdentity {
  bool operator()(Eigen::VectorXd&) const { return false; }
};

/// `precondition(v)` may replace v by H0 v for a fixed initial inverse
/// Hessian H0 and return true; otherwise the usual s'y / y'y scaling applies.
template <typename Objective, typename Observer, typename Preconditioner = ScaledIdentity>
LbfgsResult lbfgs_minimize(Eigen::VectorXd& x, Objective&& fg, Observer&& on_iter, const LbfgsOptions& opt,
                           Preconditioner&& precondition = Preconditioner{}) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  LbfgsResult res;

  Eigen::VectorXd g(x.size());
  double f = fg(x, g);
  on_iter(0, x, f);
  res.value = f;
  if (x.size() == 0 || g.norm() < opt.grad_tol) {
    res.status = LbfgsStatus::Converged;
    return res;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd x_new(x.size()), g_new(x.size()), d(x.size());
  std::vector<double> alpha(opt.history);

  for (int k = 1; k <= opt.max_iters; ++k) {
    // Two-loop recursion.
    d = -g;
    const int m = static_cast<int>(s_hist.size());
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    const bool preconditioned = precondition(d);
    if (!preconditioned && m > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = m == 0 && !preconditioned ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    bool accepted = false;
    double f_new = f;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    bool have_armijo = false;
    double armijo_step = 0.0, armijo_f = f;
    Eigen::VectorXd armijo_g;
    for (int b = 0; b < opt.max_backtracks; ++b) {
      x_new = x + step * d;
      f_new = fg(x_new, g_new);
      if (!std::isfinite(f_new) || f_new > f + opt.armijo * step * slope) {
        hi = step;
      } else {
        if (!have_armijo || f_new < armijo_f) {
          have_armijo = true;
          armijo_step = step;
          armijo_f = f_new;
          armijo_g = g_new;
        }
        if (opt.wolfe <= 0.0 || g_new.dot(d) >= opt.wolfe * slope) {
          accepted = true;
          break;
        }
        lo = step;
      }
      step = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * lo;
    }
    if (!accepted && have_armijo) {
      accepted = true;
      step = armijo_step;
      x_new = x + step * d;
      f_new = armijo_f;
      g_new = armijo_g;
    }
    if (!accepted) {
      res.status = LbfgsStatus::LineSearchFailed;
      res.iterations = k - 1;
      res.value = f;
      return res;
    }

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x = x_new;
    g = g_new;
    f = f_new;
    on_iter(k, x, f);
    res.iterations = k;
    res.value = f;

    if (g.norm() < opt.grad_tol) {
      res.status = LbfgsStatus::Converged;
      return res;
    }
    if (opt.budget > 0.0 && std::chrono::duration<double>(Clock::now() - t0).count() > opt.budget) {
      res.status = LbfgsStatus::Budget;
      return res;
    }
  }
  res.status = LbfgsStatus::MaxIterations;
  return res;
}

}  // namespace kinoplan
