#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "impactfrac/error.hpp"
#include "impactfrac/numerics.hpp"
#include "impactfrac/simulation.hpp"

namespace impactfrac {

namespace {

struct Outcome {
  bool ok = false;
  double point = 0.0;
  double se = 0.0;
  bool covered = false;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
};

struct Replication {
  Outcome empirical;
  Outcome approximate;
};

template <typename F>
Outcome attempt(F&& estimate, double truth) {
  Outcome o;
  try {
    const EstimateResult r = estimate();
    o.ok = true;
    o.point = r.point;
    o.se = r.se.value_or(0.0);
    o.covered = r.ci && r.ci->lower <= truth && truth <= r.ci->upper;
  } catch (const Error& e) {
    o.code = e.code();
    o.message = e.what();
  }
  return o;
}

Replication replicate(const Scenario& s, const FittedDistribution& dist, double truth,
                      std::uint64_t index) {
  auto rng = numerics::RandomStream::derived(s.seed, index);
  const std::vector<double> x = sample(dist, s.n, rng);
  const double var = s.beta_variance.variance(s.n);
  const double beta = rng.normal(s.beta0, std::sqrt(var));
  const auto model = RelativeRiskModel::scalar(RiskForm::Exponential, beta, std::sqrt(var));
  const auto data = ExposureSample::scalar(x);
  EstimateOptions opt;
  opt.level = s.level;

  Replication r;
  r.empirical = attempt([&] { return empirical_estimate(data, model, s.cft, opt); }, truth);
  r.approximate = attempt(
      [&] {
        return approximate_estimate(SummaryStats::from_sample(data), model, s.cft,
                                    s.approximate_mode, opt);
      },
      truth);
  return r;
}

MethodReport reduce(const std::vector<Replication>& reps, Outcome Replication::*which,
                    Method method, double truth) {
  MethodReport m;
  m.method = method;
  numerics::ExactSum est, rel, se;
  std::size_t covered = 0;
  std::map<ErrorCode, std::string> first_failure;
  std::vector<double> points;
  points.reserve(reps.size());
  for (const auto& rep : reps) {
    const Outcome& o = rep.*which;
    if (!o.ok) {
      ++m.failures;
      first_failure.emplace(o.code, o.message);
      continue;
    }
    ++m.successes;
    points.push_back(o.point);
    est.add(o.point);
    rel.add((o.point - truth) / truth);
    se.add(o.se);
    if (o.covered) ++covered;
  }
  for (auto& [code, msg] : first_failure) m.failure_messages.push_back(msg);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double k = static_cast<double>(m.successes);
  m.coverage = static_cast<double>(covered) / static_cast<double>(reps.size());
  if (m.successes == 0) {
    m.mean_estimate = m.mean_rel_bias = m.mean_se = m.sd_of_estimates = nan;
    return m;
  }
  m.mean_estimate = est.result() / k;
  m.mean_rel_bias = truth != 0.0 ? rel.result() / k : nan;
  m.mean_se = se.result() / k;
  if (m.successes > 1) {
    numerics::ExactSum ss;
    for (double p : points) ss.add((p - m.mean_estimate) * (p - m.mean_estimate));
    m.sd_of_estimates = std::sqrt(ss.result() / (k - 1.0));
  } else {
    m.sd_of_estimates = nan;
  }
  return m;
}

}  // namespace

void Scenario::validate() const {
  if (n < 2) fail(ErrorCode::InvalidArgument, "scenario sample size must be at least 2");
  if (replications < 1) fail(ErrorCode::InvalidArgument, "scenario needs at least one replication");
  if (!(p0 >= 0.0 && p0 <= 1.0)) fail(ErrorCode::InvalidArgument, "p0 must lie in [0, 1]");
  if (!(beta_variance.variance(n) > 0.0)) {
    fail(ErrorCode::InvalidArgument, "coefficient variance sigma^2(n) must be positive");
  }
  if (!std::isfinite(beta0)) fail(ErrorCode::InvalidArgument, "beta0 must be finite");
}

ScenarioReport run_scenario(const Scenario& scenario, unsigned threads) {
  scenario.validate();
  const FittedDistribution dist = scenario.generator.with_zero_mass(scenario.p0);
  const auto truth_model = RelativeRiskModel::scalar(RiskForm::Exponential, scenario.beta0, 0.0);

  ScenarioReport report;
  report.scenario = scenario;
  report.quantity = scenario.cft.kind() == CounterfactualKind::Zero ? Quantity::PAF : Quantity::PIF;
  report.true_value = report.quantity == Quantity::PAF
                          ? true_paf_oracle(dist, truth_model)
                          : standard_estimate(dist, truth_model, scenario.cft).point;

  const std::size_t b_total = scenario.replications;
  std::vector<Replication> reps(b_total);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, b_total));

  auto work = [&](unsigned t) {
    for (std::size_t b = t; b < b_total; b += threads) {
      reps[b] = replicate(scenario, dist, report.true_value, b);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  report.empirical = reduce(reps, &Replication::empirical, Method::Empirical, report.true_value);
  report.approximate = reduce(reps, &Replication::approximate,
                              scenario.approximate_mode == ApproximateMode::PaperSD
                                  ? Method::ApproximatePaperSD
                                  : Method::Approximate,
                              report.true_value);
  return report;
}

FittedDistribution coverage_generator(Family family, double upper) {
  switch (family) {
    case Family::Lognormal: return FittedDistribution::lognormal(0.05, 0.98).truncated(0.0, upper);
    case Family::Weibull: return FittedDistribution::weibull(1.20, 1.66).truncated(0.0, upper);
    case Family::Normal:
      return FittedDistribution::normal(1.56, 1.37).with_folding().truncated(0.0, upper);
    case Family::Gamma: return FittedDistribution::gamma(1.41, 0.90).truncated(0.0, upper);
  }
  fail(ErrorCode::InvalidArgument, "unknown family");
}

Scenario coverage_scenario(Family family, double p0, std::size_t n, std::size_t replications,
                           std::uint64_t seed) {
  Scenario s;
  s.generator = coverage_generator(family);
  s.label = std::string(to_string(family));
  s.p0 = p0;
  s.n = n;
  s.replications = replications;
  s.seed = seed;
  return s;
}

}  // namespace impactfrac
