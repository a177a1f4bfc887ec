#include <cmath>
#include <vector>

#include "common.hpp"

namespace impactfrac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Per-row relative risks and their beta-gradients under g (identity when
// absent).
struct RowRisks {
  std::vector<double> rr;
  MatrixXd grad;  // n x k
};

RowRisks row_risks(const ExposureSample& sample, const RelativeRiskModel& model,
                   const std::optional<Counterfactual>& cft) {
  const auto n = sample.size();
  RowRisks out{std::vector<double>(static_cast<std::size_t>(n)), MatrixXd(n, model.dimension())};
  if (sample.dimension() != model.dimension()) {
    fail(ErrorCode::DimensionMismatch, "sample has " + std::to_string(sample.dimension()) +
                                           " columns, model expects " +
                                           std::to_string(model.dimension()));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd x = sample.values().row(i).transpose();
    if (cft) x = cft->apply(x);
    out.rr[static_cast<std::size_t>(i)] = model.value(x);
    out.grad.row(i) = model.grad_beta(x).transpose();
  }
  return out;
}

// Normalized weights sum to 1 only up to rounding; every weighted mean is
// divided by their exact total.
double weight_total(const std::vector<double>& w) { return numerics::exact_sum(w); }

double weighted_mean(const std::vector<double>& w, const std::vector<double>& v) {
  numerics::ExactSum acc;
  for (std::size_t i = 0; i < v.size(); ++i) acc.add(w[i] * v[i]);
  return acc.result() / weight_total(w);
}

VectorXd weighted_column_means(const std::vector<double>& w, const MatrixXd& m) {
  VectorXd out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    numerics::ExactSum acc;
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc.add(w[static_cast<std::size_t>(i)] * m(i, j));
    out[j] = acc.result() / weight_total(w);
  }
  return out;
}

double weighted_cov(const std::vector<double>& w, const std::vector<double>& a, double ma,
                    const std::vector<double>& b, double mb) {
  numerics::ExactSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(w[i] * (a[i] - ma) * (b[i] - mb));
  return acc.result() / weight_total(w);
}

void check_mean(double mu, const char* which) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    fail(ErrorCode::DegenerateMean, std::string(which) + " mean relative risk is not positive");
  }
}

}  // namespace

double empirical_mu(const ExposureSample& sample, const RelativeRiskModel& model,
                    const std::optional<Counterfactual>& cft) {
  const auto w = sample.normalized_weights();
  if (sample.dimension() != model.dimension()) {
    fail(ErrorCode::DimensionMismatch, "sample and model dimensions differ");
  }
  numerics::ExactSum acc;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    VectorXd x = sample.values().row(i).transpose();
    if (cft) x = cft->apply(x);
    acc.add(w[static_cast<std::size_t>(i)] * model.value(x));
  }
  return acc.result() / weight_total(w);
}

EstimateResult empirical_estimate(const ExposureSample& sample, const RelativeRiskModel& model,
                                  const Counterfactual& cft, const EstimateOptions& options) {
  detail::wald_z(options.level);
  EstimateResult r;
  r.method = Method::Empirical;
  r.quantity = detail::quantity_for(cft);
  if (sample.non_uniform_weights()) {
    r.diagnostics.notes.emplace_back(
        "non-uniform weights treated as frequency weights (effective n = sum of weights)");
  }

  const auto w = sample.normalized_weights();
  const double n_eff = sample.total_weight();
  const MatrixXd& sigma_beta = model.beta_cov();

  const RowRisks obs = row_risks(sample, model, std::nullopt);
  const double mu_obs = weighted_mean(w, obs.rr);
  check_mean(mu_obs, "observed");
  const VectorXd g_obs = weighted_column_means(w, obs.grad);
  const double var_obs = weighted_cov(w, obs.rr, mu_obs, obs.rr, mu_obs);
  r.diagnostics.mu_obs = mu_obs;

  if (cft.kind() == CounterfactualKind::Zero) {
    r.diagnostics.mu_cft = 1.0;
    r.point = 1.0 - 1.0 / mu_obs;
    const double var_mu = var_obs / n_eff + g_obs.dot(sigma_beta * g_obs);
    detail::attach_wald(r, var_mu / std::pow(mu_obs, 4), options);
    return r;
  }

  const RowRisks cf = row_risks(sample, model, cft);
  const double mu_cft = weighted_mean(w, cf.rr);
  check_mean(mu_cft, "counterfactual");
  r.diagnostics.mu_cft = mu_cft;
  r.point = 1.0 - mu_cft / mu_obs;

  Eigen::Matrix2d sigma1;
  sigma1(0, 0) = var_obs;
  sigma1(1, 1) = weighted_cov(w, cf.rr, mu_cft, cf.rr, mu_cft);
  sigma1(0, 1) = sigma1(1, 0) = weighted_cov(w, obs.rr, mu_obs, cf.rr, mu_cft);
  MatrixXd jac(2, model.dimension());
  jac.row(0) = g_obs.transpose();
  jac.row(1) = weighted_column_means(w, cf.grad).transpose();
  const MatrixXd sigma = sigma1 / n_eff + jac * sigma_beta * jac.transpose();
  Eigen::Vector2d d(mu_cft / (mu_obs * mu_obs), -1.0 / mu_obs);
  detail::attach_wald(r, d.dot(sigma * d), options);
  return r;
}

}  // namespace impactfrac
