#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impactfrac/distributions.hpp"
#include "impactfrac/estimators.hpp"
#include "impactfrac/rr_models.hpp"

namespace impactfrac {

// ---------------------------------------------------------------------------
// Monte Carlo coverage study
// ---------------------------------------------------------------------------

/// sigma^2(n) = numerator / n for the coefficient draw.
struct BetaVarianceRule {
  double numerator = 70000.0 * 0.0443 * 0.0443 / 7.0;
  double variance(std::size_t n) const { return numerator / static_cast<double>(n); }
};

struct Scenario {
  /// Continuous part of the generating distribution (already truncated and
  /// folded as required); the zero mass is taken from p0.
  FittedDistribution generator = FittedDistribution::lognormal(0.05, 0.98).truncated(0.0, 12.0);
  std::string label = "lognormal";
  double p0 = 0.0;
  std::size_t n = 1000;
  std::size_t replications = 1000;
  double beta0 = 0.23901690047049992;  // ln 1.27
  BetaVarianceRule beta_variance;
  std::uint64_t seed = 1;
  Counterfactual cft = Counterfactual::zero();
  ApproximateMode approximate_mode = ApproximateMode::PaperSD;
  double level = 0.95;

  /// Throws InvalidArgument for n < 2, zero replications, p0 outside
  /// [0, 1] or a non-positive coefficient variance.
  void validate() const;
};

struct MethodReport {
  Method method = Method::Empirical;
  double mean_estimate = 0.0;
  /// mean((estimate - truth) / truth); NaN when the truth is 0.
  double mean_rel_bias = 0.0;
  double mean_se = 0.0;
  double sd_of_estimates = 0.0;
  /// Replications whose interval contains the truth, divided by B. Failed
  /// replications count as not covering.
  double coverage = 0.0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  /// First error message per distinct error code.
  std::vector<std::string> failure_messages;
};

struct ScenarioReport {
  Scenario scenario;
  double true_value = 0.0;
  Quantity quantity = Quantity::PAF;
  MethodReport empirical;
  MethodReport approximate;
};

/// Runs all replications, splitting them over `threads` workers (0 picks
/// the hardware concurrency). Replication b draws from a stream derived from
/// (seed, b) and results are reduced in replication order, so the report is
/// identical for every thread count.
ScenarioReport run_scenario(const Scenario& scenario, unsigned threads = 0);

/// Generating distribution of the coverage study for a family at bound M:
/// lognormal(0.05, 0.98), Weibull(1.20, 1.66), a folded normal(1.56, 1.37)
/// or gamma(1.41, 0.90), truncated to [0, M] and renormalized.
FittedDistribution coverage_generator(Family family, double upper = 12.0);

Scenario coverage_scenario(Family family, double p0, std::size_t n, std::size_t replications,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Distributional-assumption bias grid
// ---------------------------------------------------------------------------

enum class TruncationConvention {
  /// Assumed normal restricted to x >= 0 and renormalized.
  Renormalized,
  /// Assumed normal restricted to x >= 0 without renormalization (mass
  /// below zero is discarded).
  Discard,
};

std::string_view to_string(TruncationConvention c);
TruncationConvention parse_convention(std::string_view name);

struct TrueSpec {
  std::string label;
  /// Exposure model used for the true PAF.
  FittedDistribution dist;
};

struct BiasCell {
  std::string true_label;
  Family assumed;
  double paf_true = 0.0;
  double paf_assumed = 0.0;
  /// 100 (PAF_assumed - PAF_true) / PAF_true.
  double bias_percent = 0.0;
  bool divergent = false;
};

struct BiasGrid {
  TruncationConvention convention = TruncationConvention::Renormalized;
  std::vector<std::string> rows;
  std::vector<Family> columns;
  /// Row-major cells.
  std::vector<BiasCell> cells;

  const BiasCell& at(std::size_t row, std::size_t column) const {
    return cells[row * columns.size() + column];
  }
};

/// The truths of the default grid: gamma(1.15, 1.29), normal(1.48, 1.38)
/// restricted to x >= 0, Weibull(1.08, 1.53).
std::vector<TrueSpec> default_true_specs();
std::vector<Family> default_assumed_families();

/// Each assumed family is moment-matched to the parent mean and variance of
/// the true distribution and evaluated by the standard method.
BiasGrid bias_grid(const std::vector<TrueSpec>& truths, const std::vector<Family>& assumed,
                   const RelativeRiskModel& model,
                   TruncationConvention convention = TruncationConvention::Renormalized);

// ---------------------------------------------------------------------------
// Truncation sensitivity
// ---------------------------------------------------------------------------

struct CurvePoint {
  double upper = 0.0;
  std::string cft;
  Quantity quantity = Quantity::PAF;
  double value = 0.0;
};

/// Mixture-method fraction over [0, M] (renormalized) for every M in the
/// grid and every counterfactual, M-major.
std::vector<CurvePoint> truncation_curve(const FittedDistribution& dist,
                                         const RelativeRiskModel& model,
                                         const std::vector<Counterfactual>& cfts,
                                         const std::vector<double>& upper_grid, double p0 = 0.0);

}  // namespace impactfrac
