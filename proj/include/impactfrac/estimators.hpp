#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "impactfrac/distributions.hpp"
#include "impactfrac/rr_models.hpp"

namespace impactfrac {

/// Individual-level exposures: one row per individual, one column per
/// exposure component, with optional positive frequency weights.
class ExposureSample {
 public:
  /// Throws DegenerateSample for n < 2, InvalidArgument for non-finite
  /// entries or non-positive weights, DimensionMismatch for a weight vector
  /// of the wrong length.
  explicit ExposureSample(Eigen::MatrixXd values,
                          std::optional<Eigen::VectorXd> weights = std::nullopt);
  static ExposureSample scalar(std::span<const double> values);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::optional<Eigen::VectorXd>& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return values_.rows(); }
  Eigen::Index dimension() const noexcept { return values_.cols(); }
  /// Sum of weights (n when unweighted).
  double total_weight() const;
  /// True when weights are present and not all equal.
  bool non_uniform_weights() const;
  /// Normalized weight of row i: w_i / sum(w), or 1/n when unweighted.
  std::vector<double> normalized_weights() const;

 private:
  Eigen::MatrixXd values_;
  std::optional<Eigen::VectorXd> weights_;
};

/// Exposure mean vector, covariance (1/n denominator) and sample size.
struct SummaryStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double n = 0.0;

  static SummaryStats from_sample(const ExposureSample& sample);
  static SummaryStats scalar(double mean, double sd, double n);
  /// Throws InvalidArgument / DimensionMismatch / DegenerateSample.
  void validate() const;
};

enum class Quantity { PAF, PIF };
enum class Method { Empirical, Approximate, ApproximatePaperSD, Standard, Mixture, DiscreteOracle };
enum class ApproximateMode { TaylorVariance, PaperSD };

std::string_view to_string(Quantity q);
std::string_view to_string(Method m);
std::string_view to_string(ApproximateMode m);
ApproximateMode parse_approximate_mode(std::string_view name);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct Diagnostics {
  double mu_obs = 0.0;
  double mu_cft = 1.0;
  bool divergent = false;
  std::vector<std::string> notes;
};

struct EstimateResult {
  Quantity quantity = Quantity::PAF;
  double point = 0.0;
  /// Absent for methods without an inferential layer (standard, mixture).
  std::optional<double> se;
  std::optional<Interval> ci;
  double level = 0.95;
  Method method = Method::Empirical;
  Diagnostics diagnostics;
};

struct EstimateOptions {
  double level = 0.95;
  /// Clamp the Wald upper bound at 1.
  bool clamp_ci_upper = false;
};

// ---------------------------------------------------------------------------
// Discrete oracle
// ---------------------------------------------------------------------------

struct PmfPoint {
  Eigen::VectorXd value;
  double probability = 0.0;
};
using Pmf = std::vector<PmfPoint>;

/// sum_i p_i RR(x_i). Throws InvalidPmf unless probabilities are
/// nonnegative and sum to 1 within 1e-12.
double discrete_expected_rr(const Pmf& pmf, const RelativeRiskModel& model);

/// [sum p_obs RR - sum p_cft RR] / sum p_obs RR.
double discrete_pif(const Pmf& pmf_obs, const Pmf& pmf_cft, const RelativeRiskModel& model);

/// Uniform pmf over the rows of a sample, in row order.
Pmf uniform_pmf(const Eigen::MatrixXd& values);

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Weighted mean of RR(g(X_i); beta), g the identity when cft is absent.
double empirical_mu(const ExposureSample& sample, const RelativeRiskModel& model,
                    const std::optional<Counterfactual>& cft = std::nullopt);

/// Plug-in sample-mean estimator with delta-method variance. A Zero
/// counterfactual gives the PAF and uses the PAF variance path.
EstimateResult empirical_estimate(const ExposureSample& sample, const RelativeRiskModel& model,
                                  const Counterfactual& cft, const EstimateOptions& options = {});

/// Second-order Taylor approximation from the exposure mean and covariance.
EstimateResult approximate_estimate(const SummaryStats& stats, const RelativeRiskModel& model,
                                    const Counterfactual& cft,
                                    ApproximateMode mode = ApproximateMode::TaylorVariance,
                                    const EstimateOptions& options = {});

/// 1 - E_cft[RR] / E_obs[RR] under a parametric exposure model. No
/// standard error is reported.
EstimateResult standard_estimate(const FittedDistribution& dist, const RelativeRiskModel& model,
                                 const Counterfactual& cft = Counterfactual::zero(),
                                 const ExpectationOptions& expectation = {});

/// Point mass p0 at zero plus `dist` on the positives, truncated to [0, M]
/// and renormalized when M is given.
EstimateResult mixture_estimate(double p0, const FittedDistribution& dist,
                                const RelativeRiskModel& model, std::optional<double> upper,
                                const Counterfactual& cft = Counterfactual::zero(),
                                const ExpectationOptions& expectation = {});

/// 1 - 1/E[RR] for a fully specified generating distribution; 1 when the
/// expectation diverges.
double true_paf_oracle(const FittedDistribution& dist, const RelativeRiskModel& model);

}  // namespace impactfrac
