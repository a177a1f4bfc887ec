#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "impactfrac/error.hpp"
#include "impactfrac/numerics.hpp"

namespace impactfrac::numerics {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_ccdf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorCode::DomainError, "normal_quantile requires 0 < p < 1");
  }
  if (p == 0.5) return 0.0;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace impactfrac::numerics
