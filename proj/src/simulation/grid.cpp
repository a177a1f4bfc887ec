#include <algorithm>
#include <cctype>
#include <string>

#include "impactfrac/error.hpp"
#include "impactfrac/simulation.hpp"

namespace impactfrac {

std::string_view to_string(TruncationConvention c) {
  return c == TruncationConvention::Renormalized ? "renormalized" : "discard";
}

TruncationConvention parse_convention(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "renormalized" || s == "renormalize" || s == "renorm") {
    return TruncationConvention::Renormalized;
  }
  if (s == "discard" || s == "non-renormalized" || s == "unnormalized") {
    return TruncationConvention::Discard;
  }
  fail(ErrorCode::InvalidArgument, "unknown truncation convention '" + std::string(name) + "'");
}

std::vector<TrueSpec> default_true_specs() {
  return {
      {"gamma", FittedDistribution::gamma(1.15, 1.29)},
      {"normal", FittedDistribution::normal(1.48, 1.38).as_exposure_model()},
      {"weibull", FittedDistribution::weibull(1.08, 1.53)},
  };
}

std::vector<Family> default_assumed_families() {
  return {Family::Gamma, Family::Lognormal, Family::Normal, Family::Weibull};
}

BiasGrid bias_grid(const std::vector<TrueSpec>& truths, const std::vector<Family>& assumed,
                   const RelativeRiskModel& model, TruncationConvention convention) {
  BiasGrid grid;
  grid.convention = convention;
  grid.columns = assumed;
  for (const auto& truth : truths) {
    grid.rows.push_back(truth.label);
    const double paf_true = true_paf_oracle(truth.dist, model);
    const double mean = truth.dist.parent_mean();
    const double var = truth.dist.parent_variance();
    for (Family family : assumed) {
      FittedDistribution fitted = fit_moments(family, mean, var);
      if (family == Family::Normal) {
        fitted = fitted.truncated(0.0, std::nullopt,
                                  convention == TruncationConvention::Renormalized);
      }
      const EstimateResult est = standard_estimate(fitted, model);
      BiasCell cell{truth.label, family, paf_true, est.point, 0.0, est.diagnostics.divergent};
      cell.bias_percent = 100.0 * (est.point - paf_true) / paf_true;
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

std::vector<CurvePoint> truncation_curve(const FittedDistribution& dist,
                                         const RelativeRiskModel& model,
                                         const std::vector<Counterfactual>& cfts,
                                         const std::vector<double>& upper_grid, double p0) {
  std::vector<CurvePoint> out;
  out.reserve(cfts.size() * upper_grid.size());
  for (double m : upper_grid) {
    if (!(m > 0.0)) fail(ErrorCode::InvalidArgument, "truncation bounds must be positive");
    for (const auto& cft : cfts) {
      const EstimateResult r = mixture_estimate(p0, dist, model, m, cft);
      out.push_back({m, cft.describe(), r.quantity, r.point});
    }
  }
  return out;
}

}  // namespace impactfrac
