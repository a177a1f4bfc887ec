#include <cmath>
#include <vector>

#include "common.hpp"

namespace impactfrac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Parameter vector layout: [mean (k) | vech(cov) (k(k+1)/2) | beta (k)].
struct Layout {
  Eigen::Index k;
  Eigen::Index vech() const { return k * (k + 1) / 2; }
  Eigen::Index size() const { return 2 * k + vech(); }
  Eigen::Index beta_offset() const { return k + vech(); }
};

struct MuAndGradient {
  double mu;
  VectorXd grad;
};

// Second-order approximation of E[RR(a X + c)] and its gradient over the
// parameter vector. In PaperSD mode (k = 1) the variance enters through
// its square root.
MuAndGradient approximate_mu(const SummaryStats& stats, const RelativeRiskModel& model, double a,
                             const VectorXd& c, ApproximateMode mode) {
  const Layout L{stats.mean.size()};
  const VectorXd& beta = model.beta();
  const VectorXd shifted = a * stats.mean + c;
  MuAndGradient out{0.0, VectorXd::Zero(L.size())};

  if (model.form() == RiskForm::Linear) {
    out.mu = 1.0 + beta.dot(shifted);
    out.grad.head(L.k) = a * beta;
    out.grad.segment(L.beta_offset(), L.k) = shifted;
    return out;
  }

  const VectorXd u = a * beta;
  const double e = std::exp(beta.dot(shifted));
  if (mode == ApproximateMode::PaperSD) {
    const double v = stats.cov(0, 0);
    const double s = std::sqrt(v);
    out.mu = e * (1.0 + 0.5 * u[0] * u[0] * s);
    out.grad[0] = u[0] * out.mu;
    const double d_s = 0.5 * e * u[0] * u[0];
    out.grad[1] = v > 0.0 ? d_s / (2.0 * s) : 0.0;
    out.grad[2] = shifted[0] * out.mu + e * a * a * s * beta[0];
    return out;
  }

  const MatrixXd& S = stats.cov;
  out.mu = e * (1.0 + 0.5 * u.dot(S * u));
  out.grad.head(L.k) = u * out.mu;
  Eigen::Index idx = L.k;
  for (Eigen::Index i = 0; i < L.k; ++i) {
    for (Eigen::Index j = i; j < L.k; ++j, ++idx) {
      out.grad[idx] = (i == j ? 0.5 : 1.0) * e * u[i] * u[j];
    }
  }
  out.grad.segment(L.beta_offset(), L.k) = shifted * out.mu + e * a * a * (S * beta);
  return out;
}

// Block-diagonal covariance of (mean, vech(cov), beta). Returns true if a
// negative variance-of-variance was clamped.
bool parameter_covariance(const SummaryStats& stats, const RelativeRiskModel& model,
                          MatrixXd& out) {
  const Layout L{stats.mean.size()};
  const double n = stats.n;
  out = MatrixXd::Zero(L.size(), L.size());
  out.topLeftCorner(L.k, L.k) = stats.cov / n;
  bool clamped = false;
  Eigen::Index idx = L.k;
  for (Eigen::Index i = 0; i < L.k; ++i) {
    for (Eigen::Index j = i; j < L.k; ++j, ++idx) {
      double var;
      if (i == j) {
        const double v = stats.cov(i, i);
        var = 3.0 * v * v / n - std::pow(v, 1.5) * (n - 3.0) / (n * (n - 1.0));
        if (var < 0.0) {
          var = 0.0;
          clamped = true;
        }
      } else {
        const double sij = stats.cov(i, j);
        var = (stats.cov(i, i) * stats.cov(j, j) + sij * sij) / n;
      }
      out(idx, idx) = var;
    }
  }
  out.bottomRightCorner(L.k, L.k) = model.beta_cov();
  return clamped;
}

}  // namespace

EstimateResult approximate_estimate(const SummaryStats& stats, const RelativeRiskModel& model,
                                    const Counterfactual& cft, ApproximateMode mode,
                                    const EstimateOptions& options) {
  stats.validate();
  detail::wald_z(options.level);
  const auto k = stats.mean.size();
  if (k != model.dimension()) fail(ErrorCode::DimensionMismatch, "summary and model dimensions differ");
  if (mode == ApproximateMode::PaperSD && (k != 1 || model.form() != RiskForm::Exponential)) {
    fail(ErrorCode::UnsupportedMode, "paper-sd mode needs a scalar exposure and exponential RR");
  }
  if (!cft.differentiable_at(stats.mean)) {
    fail(ErrorCode::NonDifferentiableCounterfactual,
         "counterfactual " + cft.describe() + " is not differentiable at the exposure mean");
  }

  EstimateResult r;
  r.method = mode == ApproximateMode::PaperSD ? Method::ApproximatePaperSD : Method::Approximate;
  r.quantity = detail::quantity_for(cft);

  const auto obs = approximate_mu(stats, model, 1.0, VectorXd::Zero(k), mode);
  const auto cf = approximate_mu(stats, model, cft.slope(), cft.intercept(k), mode);
  if (!(obs.mu > 0.0)) fail(ErrorCode::DegenerateMean, "approximate observed mean RR is not positive");
  if (!(cf.mu > 0.0)) {
    fail(ErrorCode::DegenerateMean, "approximate counterfactual mean RR is not positive");
  }
  r.diagnostics.mu_obs = obs.mu;
  r.diagnostics.mu_cft = cf.mu;
  r.point = 1.0 - cf.mu / obs.mu;

  const VectorXd grad = -cf.grad / obs.mu + (cf.mu / (obs.mu * obs.mu)) * obs.grad;
  MatrixXd sigma;
  if (parameter_covariance(stats, model, sigma)) {
    r.diagnostics.notes.emplace_back(
        "variance of the sample variance was negative for a small variance; clamped to 0");
  }
  detail::attach_wald(r, grad.dot(sigma * grad), options);
  return r;
}

}  // namespace impactfrac
