#pragma once

#include <algorithm>
#include <cmath>

#include "impactfrac/estimators.hpp"
#include "impactfrac/error.hpp"
#include "impactfrac/numerics.hpp"

namespace impactfrac::detail {

inline double wald_z(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidArgument, "level must be in (0, 1)");
  return numerics::normal_quantile(0.5 + 0.5 * level);
}

// Attaches se and the symmetric Wald interval. Negative round-off variance
// is clamped to zero.
inline void attach_wald(EstimateResult& r, double variance, const EstimateOptions& options) {
  const double z = wald_z(options.level);
  if (variance < 0.0) {
    r.diagnostics.notes.emplace_back("negative variance from round-off clamped to 0");
    variance = 0.0;
  }
  const double se = std::sqrt(variance);
  r.se = se;
  r.level = options.level;
  Interval ci{r.point - z * se, r.point + z * se};
  if (options.clamp_ci_upper) ci.upper = std::min(ci.upper, 1.0);
  r.ci = ci;
}

inline Quantity quantity_for(const Counterfactual& cft) {
  return cft.kind() == CounterfactualKind::Zero ? Quantity::PAF : Quantity::PIF;
}

}  // namespace impactfrac::detail
