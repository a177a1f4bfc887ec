#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "impactfrac/numerics.hpp"
#include "impactfrac/rr_models.hpp"

namespace impactfrac {

enum class Family { Gamma, Lognormal, Normal, Weibull };
enum class FitMethod { MoM, MLE, Manual };

std::string_view to_string(Family family);
std::string_view to_string(FitMethod method);
/// Accepts gamma, lognormal, normal, weibull (case-insensitive).
Family parse_family(std::string_view name);

/// Result of an expected-relative-risk evaluation: either a finite value or
/// a typed divergence (the integral is infinite).
class RiskExpectation {
 public:
  static RiskExpectation finite(double value) { return RiskExpectation(value, false); }
  static RiskExpectation divergent() { return RiskExpectation(0.0, true); }

  bool is_divergent() const noexcept { return divergent_; }
  /// Throws InvalidArgument when divergent.
  double value() const;

 private:
  RiskExpectation(double v, bool d) : value_(v), divergent_(d) {}
  double value_;
  bool divergent_;
};

/// Parametric exposure distribution with optional truncation window, folding
/// at zero and a point mass at zero.
///
/// The continuous part is the parent family restricted to [lower, upper].
/// With `renormalize` the restricted density is divided by the window mass;
/// without it the mass outside the window is simply discarded. A folded
/// distribution is that of |Y| for Y from the parent (meaningful for Normal
/// only; for positive families folding changes nothing).
///
/// Parameters by family:
///   Gamma      shape k, scale theta
///   Lognormal  log_mean, log_sd   (mean and sd of log X)
///   Normal     mean mu, sd sigma
///   Weibull    shape k, scale lambda
class FittedDistribution {
 public:
  static FittedDistribution gamma(double shape, double scale);
  static FittedDistribution lognormal(double log_mean, double log_sd);
  static FittedDistribution normal(double mean, double sd);
  static FittedDistribution weibull(double shape, double scale);
  static FittedDistribution make(Family family, double first, double second);

  Family family() const noexcept { return family_; }
  /// (first, second) parameter in the order listed above.
  std::array<double, 2> parameters() const noexcept { return {first_, second_}; }
  std::optional<double> lower() const noexcept { return lower_; }
  std::optional<double> upper() const noexcept { return upper_; }
  bool renormalize() const noexcept { return renormalize_; }
  bool folded() const noexcept { return folded_; }
  double zero_mass() const noexcept { return zero_mass_; }
  FitMethod fit_method() const noexcept { return fit_method_; }

  FittedDistribution truncated(std::optional<double> lower, std::optional<double> upper,
                               bool renormalize = true) const;
  FittedDistribution with_zero_mass(double p0) const;
  FittedDistribution with_folding(bool folded = true) const;
  FittedDistribution with_fit_method(FitMethod method) const;
  /// Exposures are nonnegative: a Normal without a lower bound gets lower
  /// truncation at 0 (renormalized). Other families are returned unchanged.
  FittedDistribution as_exposure_model() const;

  /// True when no truncation window narrows the family's natural support.
  bool untruncated() const;

  // Untruncated parent family.
  double parent_pdf(double x) const;
  double parent_log_pdf(double x) const;
  double parent_cdf(double x) const;
  double parent_ccdf(double x) const;
  double parent_quantile(double p) const;
  double parent_mean() const;
  double parent_variance() const;

  /// Density of the continuous part, scaled by (1 - zero_mass); 0 outside
  /// the window.
  double pdf(double x) const;
  /// Log of the window density of the continuous part (not scaled by the
  /// zero mass); -inf outside the window.
  double window_log_pdf(double x) const;
  /// Distribution function including the point mass at zero.
  double cdf(double x) const;

  /// Effective integration window of the continuous part.
  double window_lower() const;
  double window_upper() const;
  /// Parent probability inside the window (after folding).
  double window_mass() const;

  std::string describe() const;

 private:
  FittedDistribution(Family family, double first, double second);

  double base_log_pdf(double x) const;
  double base_cdf(double x) const;
  double base_ccdf(double x) const;
  double support_lower() const;

  Family family_;
  double first_;
  double second_;
  std::optional<double> lower_;
  std::optional<double> upper_;
  bool renormalize_ = true;
  bool folded_ = false;
  double zero_mass_ = 0.0;
  FitMethod fit_method_ = FitMethod::Manual;
};

/// Method-of-moments fit: the returned (untruncated) distribution has exactly
/// the given mean and variance.
FittedDistribution fit_moments(Family family, double mean, double variance);

/// Maximum-likelihood fit to strictly positive data. Normal and Lognormal in
/// closed form (variance denominator n); Gamma and Weibull by BFGS over the
/// log-parameters, started from the moment fit.
FittedDistribution fit_mle(Family family, std::span<const double> data);

/// Sum of parent log-densities.
double log_likelihood(const FittedDistribution& dist, std::span<const double> data);

enum class ExpectationRoute {
  /// Closed forms where they exist, analytic divergence detection,
  /// quadrature otherwise.
  Automatic,
  /// Always integrate numerically (divergence is still detected
  /// analytically first).
  Quadrature,
};

struct ExpectationOptions {
  ExpectationRoute route = ExpectationRoute::Automatic;
  numerics::QuadratureOptions quadrature{1e-13, 1e-11, 400};
};

/// E[RR(g(X); beta)] for scalar exposure X ~ dist, with g the identity when
/// `cft` is absent:
///   p0 * RR(g(0)) + (1 - p0) * E_window[RR(g(X))].
RiskExpectation expected_rr(const FittedDistribution& dist, const RelativeRiskModel& model,
                            const std::optional<Counterfactual>& cft = std::nullopt,
                            const ExpectationOptions& options = {});

/// n draws: zero with probability p0, otherwise inverse-CDF sampling from the
/// truncated (and folded) continuous part.
std::vector<double> sample(const FittedDistribution& dist, std::size_t n,
                           numerics::RandomStream& rng);

}  // namespace impactfrac
