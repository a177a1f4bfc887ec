#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace impactfrac {

enum class RiskForm { Exponential, Linear };

/// Relative risk function RR(x; beta) with the sampling covariance of the
/// coefficient estimate. Intercepts are not part of the model: they cancel
/// in every ratio of relative risks.
///
///   Exponential: RR = exp(beta' x)
///   Linear:      RR = 1 + beta' x
class RelativeRiskModel {
 public:
  /// Throws DimensionMismatch if sizes disagree and InvalidArgument if
  /// beta_cov is not symmetric positive semi-definite.
  RelativeRiskModel(RiskForm form, Eigen::VectorXd beta, Eigen::MatrixXd beta_cov);

  /// Scalar exposure with coefficient standard error `beta_se`.
  static RelativeRiskModel scalar(RiskForm form, double beta, double beta_se);

  /// Exponential model from a reported relative risk and its confidence
  /// interval: beta = ln rr, se = (ln upper - ln lower) / (2 z).
  static RelativeRiskModel from_relative_risk(double rr, double ci_lower, double ci_upper,
                                              double level = 0.95);

  RiskForm form() const noexcept { return form_; }
  const Eigen::VectorXd& beta() const noexcept { return beta_; }
  const Eigen::MatrixXd& beta_cov() const noexcept { return beta_cov_; }
  Eigen::Index dimension() const noexcept { return beta_.size(); }

  /// Same form and covariance, different coefficients.
  RelativeRiskModel with_beta(Eigen::VectorXd beta) const;

  /// beta' x; the linear predictor shared by both forms.
  double predictor(const Eigen::VectorXd& x) const;

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_beta(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hess_x(const Eigen::VectorXd& x) const;

  // Scalar-exposure conveniences.
  double value(double x) const;

 private:
  void check_dimension(const Eigen::VectorXd& x) const;

  RiskForm form_;
  Eigen::VectorXd beta_;
  Eigen::MatrixXd beta_cov_;
};

enum class CounterfactualKind { Zero, Identity, Scale, Shift };

struct CounterfactualDerivatives {
  Eigen::MatrixXd jacobian;
  /// hessians[i] is the Hessian of the i-th output component.
  std::vector<Eigen::MatrixXd> hessians;
};

/// Counterfactual exposure transformation g(x): zero, identity, a
/// proportional scale a*x, or an additive shift x + d, optionally floored at
/// zero componentwise.
class Counterfactual {
 public:
  static Counterfactual zero();
  static Counterfactual identity(bool clamp_at_zero = false);
  static Counterfactual scale(double factor, bool clamp_at_zero = false);
  static Counterfactual shift(Eigen::VectorXd offset, bool clamp_at_zero = false);
  /// Same offset on each of k components.
  static Counterfactual shift(double offset, Eigen::Index k, bool clamp_at_zero = false);

  CounterfactualKind kind() const noexcept { return kind_; }
  bool clamp_at_zero() const noexcept { return clamp_; }
  double factor() const noexcept { return factor_; }
  const Eigen::VectorXd& offset() const noexcept { return offset_; }

  /// Multiplier a in the affine form g(x) = a x + c (before clamping).
  double slope() const noexcept;
  /// Offset c in the affine form, sized for a k-component exposure.
  Eigen::VectorXd intercept(Eigen::Index k) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  double apply(double x) const;

  /// Throws NonDifferentiableAtPoint for a clamped transform when any
  /// component of the unclamped image is <= 0.
  CounterfactualDerivatives derivatives(const Eigen::VectorXd& x) const;

  /// True when the transform has well-defined first and second derivatives
  /// at x.
  bool differentiable_at(const Eigen::VectorXd& x) const;

  /// Compact text form: zero, identity, scale:<a>, shift:<d>, with a
  /// trailing "+clamp" when clamped.
  std::string describe() const;

 private:
  Counterfactual(CounterfactualKind kind, double factor, Eigen::VectorXd offset, bool clamp);
  Eigen::VectorXd unclamped(const Eigen::VectorXd& x) const;

  CounterfactualKind kind_;
  double factor_;
  Eigen::VectorXd offset_;
  bool clamp_;
};

}  // namespace impactfrac
