#include "impactfrac/rr_models.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "impactfrac/error.hpp"
#include "impactfrac/numerics.hpp"

namespace impactfrac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

RelativeRiskModel::RelativeRiskModel(RiskForm form, VectorXd beta, MatrixXd beta_cov)
    : form_(form), beta_(std::move(beta)), beta_cov_(std::move(beta_cov)) {
  if (beta_cov_.rows() != beta_.size() || beta_cov_.cols() != beta_.size()) {
    fail(ErrorCode::DimensionMismatch, "beta_cov must be k x k with k = dim(beta)");
  }
  if (!beta_.allFinite() || !beta_cov_.allFinite()) {
    fail(ErrorCode::InvalidArgument, "beta and beta_cov must be finite");
  }
  const double scale = std::max(1.0, beta_cov_.cwiseAbs().maxCoeff());
  if ((beta_cov_ - beta_cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorCode::InvalidArgument, "beta_cov must be symmetric");
  }
  if (beta_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(beta_cov_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
      fail(ErrorCode::InvalidArgument, "beta_cov must be positive semi-definite");
    }
  }
}

RelativeRiskModel RelativeRiskModel::scalar(RiskForm form, double beta, double beta_se) {
  if (!(beta_se >= 0.0)) fail(ErrorCode::InvalidArgument, "beta standard error must be >= 0");
  return {form, VectorXd::Constant(1, beta), MatrixXd::Constant(1, 1, beta_se * beta_se)};
}

RelativeRiskModel RelativeRiskModel::from_relative_risk(double rr, double ci_lower,
                                                        double ci_upper, double level) {
  if (!(rr > 0.0 && ci_lower > 0.0 && ci_upper > ci_lower)) {
    fail(ErrorCode::InvalidArgument, "need 0 < ci_lower < ci_upper and rr > 0");
  }
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidArgument, "level must be in (0,1)");
  const double z = numerics::normal_quantile(0.5 + 0.5 * level);
  const double se = (std::log(ci_upper) - std::log(ci_lower)) / (2.0 * z);
  return scalar(RiskForm::Exponential, std::log(rr), se);
}

RelativeRiskModel RelativeRiskModel::with_beta(VectorXd beta) const {
  return {form_, std::move(beta), beta_cov_};
}

void RelativeRiskModel::check_dimension(const VectorXd& x) const {
  if (x.size() != beta_.size()) {
    fail(ErrorCode::DimensionMismatch, "exposure has " + std::to_string(x.size()) +
                                           " components, model expects " +
                                           std::to_string(beta_.size()));
  }
}

double RelativeRiskModel::predictor(const VectorXd& x) const {
  check_dimension(x);
  return beta_.dot(x);
}

double RelativeRiskModel::value(const VectorXd& x) const {
  const double eta = predictor(x);
  if (form_ == RiskForm::Exponential) return std::exp(eta);
  const double rr = 1.0 + eta;
  if (!(rr > 0.0)) fail(ErrorCode::NonPositiveRisk, "linear relative risk 1 + beta'x <= 0");
  return rr;
}

double RelativeRiskModel::value(double x) const { return value(VectorXd::Constant(1, x)); }

VectorXd RelativeRiskModel::grad_beta(const VectorXd& x) const {
  if (form_ == RiskForm::Exponential) return x * value(x);
  check_dimension(x);
  return x;
}

MatrixXd RelativeRiskModel::hess_x(const VectorXd& x) const {
  if (form_ == RiskForm::Linear) {
    check_dimension(x);
    return MatrixXd::Zero(x.size(), x.size());
  }
  return beta_ * beta_.transpose() * value(x);
}

// ---------------------------------------------------------------------------

Counterfactual::Counterfactual(CounterfactualKind kind, double factor, VectorXd offset,
                               bool clamp)
    : kind_(kind), factor_(factor), offset_(std::move(offset)), clamp_(clamp) {}

Counterfactual Counterfactual::zero() { return {CounterfactualKind::Zero, 0.0, {}, false}; }

Counterfactual Counterfactual::identity(bool clamp_at_zero) {
  return {CounterfactualKind::Identity, 1.0, {}, clamp_at_zero};
}

Counterfactual Counterfactual::scale(double factor, bool clamp_at_zero) {
  if (!std::isfinite(factor)) fail(ErrorCode::InvalidArgument, "scale factor must be finite");
  return {CounterfactualKind::Scale, factor, {}, clamp_at_zero};
}

Counterfactual Counterfactual::shift(VectorXd offset, bool clamp_at_zero) {
  if (!offset.allFinite()) fail(ErrorCode::InvalidArgument, "shift offset must be finite");
  return {CounterfactualKind::Shift, 1.0, std::move(offset), clamp_at_zero};
}

Counterfactual Counterfactual::shift(double offset, Eigen::Index k, bool clamp_at_zero) {
  return shift(VectorXd::Constant(k, offset), clamp_at_zero);
}

double Counterfactual::slope() const noexcept {
  switch (kind_) {
    case CounterfactualKind::Zero: return 0.0;
    case CounterfactualKind::Scale: return factor_;
    case CounterfactualKind::Identity:
    case CounterfactualKind::Shift: return 1.0;
  }
  return 1.0;
}

VectorXd Counterfactual::intercept(Eigen::Index k) const {
  if (kind_ != CounterfactualKind::Shift) return VectorXd::Zero(k);
  if (offset_.size() != k) {
    fail(ErrorCode::DimensionMismatch, "shift offset has " + std::to_string(offset_.size()) +
                                           " components, exposure has " + std::to_string(k));
  }
  return offset_;
}

VectorXd Counterfactual::unclamped(const VectorXd& x) const {
  switch (kind_) {
    case CounterfactualKind::Zero: return VectorXd::Zero(x.size());
    case CounterfactualKind::Identity: return x;
    case CounterfactualKind::Scale: return factor_ * x;
    case CounterfactualKind::Shift: return x + intercept(x.size());
  }
  return x;
}

VectorXd Counterfactual::apply(const VectorXd& x) const {
  VectorXd y = unclamped(x);
  if (clamp_) y = y.cwiseMax(0.0);
  return y;
}

double Counterfactual::apply(double x) const { return apply(VectorXd::Constant(1, x))[0]; }

bool Counterfactual::differentiable_at(const VectorXd& x) const {
  if (!clamp_ || kind_ == CounterfactualKind::Zero) return true;
  return (unclamped(x).array() > 0.0).all();
}

CounterfactualDerivatives Counterfactual::derivatives(const VectorXd& x) const {
  if (!differentiable_at(x)) {
    fail(ErrorCode::NonDifferentiableAtPoint,
         "clamped counterfactual " + describe() + " has a kink at the evaluation point");
  }
  const auto k = x.size();
  if (kind_ == CounterfactualKind::Shift) (void)intercept(k);
  CounterfactualDerivatives d;
  d.jacobian = MatrixXd::Identity(k, k) * slope();
  d.hessians.assign(static_cast<std::size_t>(k), MatrixXd::Zero(k, k));
  return d;
}

std::string Counterfactual::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case CounterfactualKind::Zero: os << "zero"; break;
    case CounterfactualKind::Identity: os << "identity"; break;
    case CounterfactualKind::Scale: os << "scale:" << factor_; break;
    case CounterfactualKind::Shift:
      os << "shift:";
      for (Eigen::Index i = 0; i < offset_.size(); ++i) os << (i ? "," : "") << offset_[i];
      break;
  }
  if (clamp_) os << "+clamp";
  return os.str();
}

}  // namespace impactfrac
