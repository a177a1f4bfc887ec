#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace impactfrac::numerics {

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------------

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 200;
};

using Integrand = std::function<double(double)>;

/// Integrates f over [a, b] with a globally adaptive 15-point Kronrod rule
/// (7-point Gauss embedded), always bisecting the interval with the largest
/// error. Either limit may be infinite; semi-infinite ranges are mapped onto
/// [0, 1) with x = a + t / (1 - t).
///
/// Throws QuadratureFailure when the subdivision budget runs out.
QuadratureResult integrate_gk(const Integrand& f, double a, double b,
                              const QuadratureOptions& options = {});

/// Same as integrate_gk but reports non-convergence through
/// QuadratureResult::converged instead of throwing.
QuadratureResult try_integrate_gk(const Integrand& f, double a, double b,
                                  const QuadratureOptions& options = {});

// ---------------------------------------------------------------------------
// BFGS maximizer
// ---------------------------------------------------------------------------

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct BfgsOptions {
  /// Convergence when |grad| < tol * (1 + |f|).
  double tol = 1e-8;
  int max_iterations = 500;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
};

struct BfgsResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Quasi-Newton maximization with a strong-Wolfe line search. When `grad` is
/// empty a central finite-difference gradient is used.
///
/// Throws Error(OptimizerDiverged) on iteration cap or non-finite values.
BfgsResult maximize_bfgs(const Objective& f, const Gradient& grad,
                         const Eigen::VectorXd& x0,
                         const BfgsOptions& options = {});

/// Central differences with step cbrt(eps) * (1 + |x_i|).
Eigen::VectorXd finite_difference_gradient(const Objective& f,
                                           const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

double normal_cdf(double x);
/// Upper tail 1 - Phi(x) without cancellation.
double normal_ccdf(double x);
double normal_pdf(double x);
/// Inverse of normal_cdf. Throws Error(DomainError) unless 0 < p < 1.
double normal_quantile(double p);

// ---------------------------------------------------------------------------
// Order-independent summation
// ---------------------------------------------------------------------------

/// Correctly rounded floating-point sum (Shewchuk's partials algorithm). The
/// result does not depend on the order values were added in.
class ExactSum {
 public:
  void add(double x);
  double result() const;

 private:
  std::vector<double> partials_;
};

double exact_sum(std::span<const double> values);

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// Seeded 64-bit stream with portable uniform and normal draws. The output
/// sequence is fully determined by the seed on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Stream for replication `index` of a run seeded with `seed`.
  static RandomStream derived(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal(double mean, double sd);

 private:
  std::uint64_t state_[4];
};

}  // namespace impactfrac::numerics
