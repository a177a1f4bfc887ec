#include <cmath>
#include <limits>
#include <string>

#include "impactfrac/error.hpp"
#include "impactfrac/numerics.hpp"

namespace impactfrac::numerics {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Everything below minimizes phi = -f.
struct LinePoint {
  double alpha;
  double phi;
  double slope;  // d phi / d alpha
  VectorXd x;
  VectorXd grad;
};

class Problem {
 public:
  Problem(const Objective& f, const Gradient& grad) : f_(f), grad_(grad) {}

  double phi(const VectorXd& x) const { return -f_(x); }

  VectorXd dphi(const VectorXd& x) const {
    return grad_ ? VectorXd(-grad_(x)) : VectorXd(-finite_difference_gradient(f_, x));
  }

 private:
  const Objective& f_;
  const Gradient& grad_;
};

LinePoint evaluate(const Problem& p, const VectorXd& x0, const VectorXd& dir, double alpha) {
  LinePoint pt;
  pt.alpha = alpha;
  pt.x = x0 + alpha * dir;
  pt.phi = p.phi(pt.x);
  pt.grad = p.dphi(pt.x);
  pt.slope = pt.grad.dot(dir);
  return pt;
}

// Minimizer of the cubic matching value and slope at both ends.
double cubic_step(const LinePoint& lo, const LinePoint& hi) {
  const double d1 = lo.slope + hi.slope - 3.0 * (lo.phi - hi.phi) / (lo.alpha - hi.alpha);
  const double disc = d1 * d1 - lo.slope * hi.slope;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double sign = hi.alpha > lo.alpha ? 1.0 : -1.0;
  const double d2 = sign * std::sqrt(disc);
  return hi.alpha -
         (hi.alpha - lo.alpha) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
}

// Zoom phase of the strong-Wolfe line search (Nocedal & Wright, Alg. 3.6).
std::optional<LinePoint> zoom(const Problem& p, const VectorXd& x0, const VectorXd& dir,
                              const LinePoint& start, LinePoint lo, LinePoint hi,
                              const BfgsOptions& opt) {
  for (int i = 0; i < 60; ++i) {
    const double a_min = std::min(lo.alpha, hi.alpha);
    const double a_max = std::max(lo.alpha, hi.alpha);
    double alpha = cubic_step(lo, hi);
    if (!std::isfinite(alpha) || alpha <= a_min || alpha >= a_max) {
      alpha = 0.5 * (lo.alpha + hi.alpha);
    }
    if (a_max - a_min <= 1e-14 * a_max) return std::nullopt;

    LinePoint trial = evaluate(p, x0, dir, alpha);
    if (!std::isfinite(trial.phi)) {
      hi = trial;
      continue;
    }
    if (trial.phi > start.phi + opt.wolfe_c1 * alpha * start.slope || trial.phi >= lo.phi) {
      hi = trial;
    } else {
      if (std::abs(trial.slope) <= -opt.wolfe_c2 * start.slope) return trial;
      if (trial.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = trial;
    }
  }
  return std::nullopt;
}

std::optional<LinePoint> wolfe_search(const Problem& p, const LinePoint& start,
                                      const VectorXd& dir, double alpha0,
                                      const BfgsOptions& opt) {
  LinePoint prev = start;
  double alpha = alpha0;
  for (int i = 0; i < 50; ++i) {
    LinePoint trial = evaluate(p, start.x, dir, alpha);
    if (!std::isfinite(trial.phi) || !trial.grad.allFinite()) {
      // Step left the region where the objective is defined; shrink.
      alpha = 0.5 * (prev.alpha + alpha);
      if (alpha - prev.alpha < 1e-16) return std::nullopt;
      continue;
    }
    if (trial.phi > start.phi + opt.wolfe_c1 * alpha * start.slope ||
        (i > 0 && trial.phi >= prev.phi)) {
      return zoom(p, start.x, dir, start, prev, trial, opt);
    }
    if (std::abs(trial.slope) <= -opt.wolfe_c2 * start.slope) return trial;
    if (trial.slope >= 0.0) return zoom(p, start.x, dir, start, trial, prev, opt);
    prev = trial;
    alpha *= 2.0;
  }
  return std::nullopt;
}

bool converged(const LinePoint& pt, double tol) {
  return pt.grad.norm() < tol * (1.0 + std::abs(pt.phi));
}

}  // namespace

VectorXd finite_difference_gradient(const Objective& f, const VectorXd& x) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  VectorXd g(x.size());
  VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = base * (1.0 + std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

BfgsResult maximize_bfgs(const Objective& f, const Gradient& grad, const VectorXd& x0,
                         const BfgsOptions& options) {
  const Problem problem(f, grad);
  const Eigen::Index dim = x0.size();

  LinePoint current;
  current.alpha = 0.0;
  current.x = x0;
  current.phi = problem.phi(x0);
  current.grad = problem.dphi(x0);
  if (!std::isfinite(current.phi) || !current.grad.allFinite()) {
    fail(ErrorCode::OptimizerDiverged, "objective is not finite at the starting point");
  }

  MatrixXd inv_hessian = MatrixXd::Identity(dim, dim);
  bool fresh = true;
  int restarts = 0;

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    if (converged(current, options.tol)) {
      return {current.x, -current.phi, iter, current.grad.norm()};
    }
    if (iter == options.max_iterations) break;

    VectorXd dir = -inv_hessian * current.grad;
    double slope = current.grad.dot(dir);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      fresh = true;
      dir = -current.grad;
      slope = current.grad.dot(dir);
    }
    current.slope = slope;

    const double alpha0 = fresh ? std::min(1.0, 1.0 / current.grad.norm()) : 1.0;
    auto next = wolfe_search(problem, current, dir, alpha0, options);
    if (!next) {
      if (!fresh && restarts < 5) {
        // Curvature information went stale; fall back to steepest descent.
        inv_hessian.setIdentity();
        fresh = true;
        ++restarts;
        continue;
      }
      fail(ErrorCode::OptimizerDiverged,
           "line search failed at iteration " + std::to_string(iter) + " with gradient norm " +
               std::to_string(current.grad.norm()));
    }

    const VectorXd s = next->x - current.x;
    const VectorXd y = next->grad - current.grad;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (fresh) {
        inv_hessian = MatrixXd::Identity(dim, dim) * (sy / y.squaredNorm());
      }
      const double rho = 1.0 / sy;
      const MatrixXd left = MatrixXd::Identity(dim, dim) - rho * s * y.transpose();
      inv_hessian = left * inv_hessian * left.transpose() + rho * s * s.transpose();
      fresh = false;
    }
    next->alpha = 0.0;
    current = std::move(*next);
  }
  fail(ErrorCode::OptimizerDiverged,
       "iteration cap of " + std::to_string(options.max_iterations) + " reached");
}

}  // namespace impactfrac::numerics
