#include <cmath>
#include <vector>

#include "common.hpp"

namespace impactfrac {

namespace {

// Returns the exact probability total.
double check_pmf(const Pmf& pmf) {
  if (pmf.empty()) fail(ErrorCode::InvalidPmf, "pmf has no support points");
  numerics::ExactSum total;
  for (const auto& p : pmf) {
    if (!(p.probability >= 0.0) || !std::isfinite(p.probability)) {
      fail(ErrorCode::InvalidPmf, "pmf probabilities must be finite and nonnegative");
    }
    total.add(p.probability);
  }
  if (std::abs(total.result() - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidPmf, "pmf probabilities must sum to 1");
  }
  return total.result();
}

}  // namespace

double discrete_expected_rr(const Pmf& pmf, const RelativeRiskModel& model) {
  const double total = check_pmf(pmf);
  numerics::ExactSum acc;
  for (const auto& p : pmf) acc.add(p.probability * model.value(p.value));
  // Dividing by the rounded total keeps a constant RR exactly constant.
  return acc.result() / total;
}

double discrete_pif(const Pmf& pmf_obs, const Pmf& pmf_cft, const RelativeRiskModel& model) {
  const double obs = discrete_expected_rr(pmf_obs, model);
  const double cft = discrete_expected_rr(pmf_cft, model);
  return (obs - cft) / obs;
}

Pmf uniform_pmf(const Eigen::MatrixXd& values) {
  Pmf pmf;
  pmf.reserve(static_cast<std::size_t>(values.rows()));
  const double p = 1.0 / static_cast<double>(values.rows());
  for (Eigen::Index i = 0; i < values.rows(); ++i) pmf.push_back({values.row(i).transpose(), p});
  return pmf;
}

}  // namespace impactfrac
