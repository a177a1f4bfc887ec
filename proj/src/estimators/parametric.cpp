#include <cmath>
#include <limits>

#include "common.hpp"

namespace impactfrac {

namespace {

EstimateResult parametric(const FittedDistribution& dist, const RelativeRiskModel& model,
                          const Counterfactual& cft, const ExpectationOptions& expectation,
                          Method method) {
  EstimateResult r;
  r.method = method;
  r.quantity = detail::quantity_for(cft);

  const RiskExpectation obs = expected_rr(dist, model, std::nullopt, expectation);
  // Under the zero counterfactual everyone is at baseline risk.
  const RiskExpectation cf = cft.kind() == CounterfactualKind::Zero
                                 ? RiskExpectation::finite(1.0)
                                 : expected_rr(dist, model, cft, expectation);

  if (obs.is_divergent()) {
    r.diagnostics.divergent = true;
    r.diagnostics.mu_obs = std::numeric_limits<double>::infinity();
    if (cf.is_divergent()) {
      r.point = std::numeric_limits<double>::quiet_NaN();
      r.diagnostics.mu_cft = std::numeric_limits<double>::infinity();
      r.diagnostics.notes.emplace_back(
          "observed and counterfactual expected RR both diverge; the fraction is undefined");
    } else {
      r.point = 1.0;
      r.diagnostics.mu_cft = cf.value();
      r.diagnostics.notes.emplace_back("observed expected RR diverges (heavy tail)");
    }
    return r;
  }

  r.diagnostics.mu_obs = obs.value();
  if (cf.is_divergent()) {
    r.diagnostics.divergent = true;
    r.diagnostics.mu_cft = std::numeric_limits<double>::infinity();
    r.point = -std::numeric_limits<double>::infinity();
    r.diagnostics.notes.emplace_back("counterfactual expected RR diverges");
    return r;
  }
  r.diagnostics.mu_cft = cf.value();
  if (!(r.diagnostics.mu_obs > 0.0)) {
    fail(ErrorCode::DegenerateMean, "expected observed relative risk is not positive");
  }
  r.point = 1.0 - r.diagnostics.mu_cft / r.diagnostics.mu_obs;
  return r;
}

}  // namespace

EstimateResult standard_estimate(const FittedDistribution& dist, const RelativeRiskModel& model,
                                 const Counterfactual& cft, const ExpectationOptions& expectation) {
  return parametric(dist, model, cft, expectation, Method::Standard);
}

EstimateResult mixture_estimate(double p0, const FittedDistribution& dist,
                                const RelativeRiskModel& model, std::optional<double> upper,
                                const Counterfactual& cft, const ExpectationOptions& expectation) {
  FittedDistribution d = dist.with_zero_mass(p0);
  if (upper) d = d.truncated(0.0, *upper, true);
  return parametric(d, model, cft, expectation, Method::Mixture);
}

double true_paf_oracle(const FittedDistribution& dist, const RelativeRiskModel& model) {
  const RiskExpectation e = expected_rr(dist, model);
  if (e.is_divergent()) return 1.0;
  return 1.0 - 1.0 / e.value();
}

}  // namespace impactfrac
