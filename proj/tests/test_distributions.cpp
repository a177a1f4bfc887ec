#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "impactfrac/distributions.hpp"
#include "impactfrac/error.hpp"

using namespace impactfrac;

namespace {

const double kBeta = std::log(1.27);

RelativeRiskModel exp_model(double beta = kBeta) {
  return RelativeRiskModel::scalar(RiskForm::Exponential, beta, 0.0);
}

template <typename F>
void check_code(ErrorCode expected, F&& f) {
  try {
    f();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == expected);
  }
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double ks_statistic(std::vector<double> x, const FittedDistribution& d) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = d.cdf(x[i]);
    worst = std::max({worst, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return worst;
}

}  // namespace

TEST_CASE("fit_moments examples") {
  const auto g = fit_moments(Family::Gamma, 1.48, 1.38 * 1.38);
  CHECK(std::round(g.parameters()[0] * 100) / 100 == doctest::Approx(1.15));
  CHECK(std::round(g.parameters()[1] * 100) / 100 == doctest::Approx(1.29));
  CHECK(g.fit_method() == FitMethod::MoM);
  const auto n = fit_moments(Family::Normal, 1.48, 1.38 * 1.38);
  CHECK(n.parameters()[0] == 1.48);
  CHECK(std::abs(n.parameters()[1] - 1.38) < 1e-15);
  const auto l = fit_moments(Family::Lognormal, 1.48, 1.38 * 1.38);
  CHECK(std::abs(l.parameters()[1] - 0.791) < 1e-3);
  CHECK(std::abs(l.parameters()[0] - 0.079) < 1e-3);
}

TEST_CASE("fit_moments round trip for every family") {
  for (Family f : {Family::Gamma, Family::Lognormal, Family::Normal, Family::Weibull}) {
    for (double mean : {0.3, 1.48, 7.0}) {
      for (double cv : {0.2, 0.93, 1.0, 2.5}) {
        const double var = cv * cv * mean * mean;
        const auto d = fit_moments(f, mean, var);
        CHECK(rel(d.parent_mean(), mean) < 1e-8);
        CHECK(rel(d.parent_variance(), var) < 1e-8);
      }
    }
  }
}

TEST_CASE("fit_moments rejects infeasible moments") {
  check_code(ErrorCode::InfeasibleMoments, [] { fit_moments(Family::Gamma, -1.0, 1.0); });
  check_code(ErrorCode::InfeasibleMoments, [] { fit_moments(Family::Weibull, 0.0, 1.0); });
  check_code(ErrorCode::InfeasibleMoments, [] { fit_moments(Family::Normal, 1.0, 0.0); });
  check_code(ErrorCode::InfeasibleMoments, [] { fit_moments(Family::Lognormal, 1.0, -2.0); });
}

TEST_CASE("fit_mle closed forms") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto n = fit_mle(Family::Normal, x);
  CHECK(n.parameters()[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(n.parameters()[1] * n.parameters()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(n.fit_method() == FitMethod::MLE);
  const auto l = fit_mle(Family::Lognormal, std::vector<double>{std::exp(1.0), std::exp(3.0)});
  CHECK(l.parameters()[0] == doctest::Approx(2.0));
  CHECK(l.parameters()[1] == doctest::Approx(1.0));
}

TEST_CASE("fit_mle rejects degenerate or invalid data") {
  const double e = std::exp(1.0);
  check_code(ErrorCode::DegenerateSample, [&] { fit_mle(Family::Lognormal, std::vector<double>{e, e}); });
  check_code(ErrorCode::NonPositiveData, [] { fit_mle(Family::Gamma, std::vector<double>{0.0, 1.0, 2.0}); });
  check_code(ErrorCode::NonPositiveData, [] { fit_mle(Family::Weibull, std::vector<double>{-1.0, 1.0}); });
  check_code(ErrorCode::DegenerateSample, [] { fit_mle(Family::Gamma, std::vector<double>{1.0}); });
}

TEST_CASE("fit_mle recovers gamma and Weibull parameters") {
  numerics::RandomStream rng(2024);
  const auto g = sample(FittedDistribution::gamma(1.41, 0.90), 10000, rng);
  const auto gf = fit_mle(Family::Gamma, g);
  CHECK(rel(gf.parameters()[0], 1.41) < 0.05);
  CHECK(rel(gf.parameters()[1], 0.90) < 0.05);
  const auto w = sample(FittedDistribution::weibull(1.20, 1.66), 10000, rng);
  const auto wf = fit_mle(Family::Weibull, w);
  CHECK(rel(wf.parameters()[0], 1.20) < 0.05);
  CHECK(rel(wf.parameters()[1], 1.66) < 0.05);
}

TEST_CASE("fit_mle never does worse than its moment start") {
  numerics::RandomStream rng(5);
  for (Family f : {Family::Gamma, Family::Weibull, Family::Lognormal, Family::Normal}) {
    for (const auto& truth : {FittedDistribution::gamma(0.7, 2.0), FittedDistribution::weibull(2.3, 1.1),
                              FittedDistribution::lognormal(0.1, 0.6)}) {
      const auto x = sample(truth, 500, rng);
      double m = 0.0, v = 0.0;
      for (double xi : x) m += xi;
      m /= static_cast<double>(x.size());
      for (double xi : x) v += (xi - m) * (xi - m);
      v /= static_cast<double>(x.size());
      const auto mom = fit_moments(f, m, v);
      const auto mle = fit_mle(f, x);
      CHECK(log_likelihood(mle, x) >= log_likelihood(mom, x) - 1e-9);
    }
  }
}

TEST_CASE("expected_rr examples") {
  const auto g = FittedDistribution::gamma(1.15, 1.29);
  const double e = expected_rr(g, exp_model()).value();
  CHECK(std::abs(e - std::pow(1.0 - kBeta * 1.29, -1.15)) < 1e-12);
  CHECK(std::abs(1.0 - 1.0 / e - 0.3455) < 1e-4);
  CHECK(expected_rr(FittedDistribution::lognormal(0.05, 0.98), exp_model()).is_divergent());
  for (const auto& d : {g, FittedDistribution::lognormal(0.05, 0.98).truncated(0.0, 12.0),
                        FittedDistribution::weibull(0.5, 2.0), FittedDistribution::normal(1.0, 2.0)}) {
    CHECK(expected_rr(d, exp_model(0.0)).value() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("expected_rr: closed form agrees with quadrature") {
  ExpectationOptions quad;
  quad.route = ExpectationRoute::Quadrature;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  const std::vector<Counterfactual> cfts{Counterfactual::identity(), Counterfactual::scale(0.6),
                                         Counterfactual::shift(-0.5, 1)};
  for (int i = 0; i < 30; ++i) {
    const double beta = 0.5 * u(gen) - 0.3;
    const auto g = FittedDistribution::gamma(u(gen), 0.9 / (std::abs(beta) + 0.5) * u(gen) / 3.0);
    const auto n = FittedDistribution::normal(u(gen) - 1.0, u(gen));
    for (const auto& c : cfts) {
      for (const auto& d : {g, n}) {
        const auto closed = expected_rr(d, exp_model(beta), c);
        const auto numeric = expected_rr(d, exp_model(beta), c, quad);
        REQUIRE_FALSE(closed.is_divergent());
        CHECK(rel(numeric.value(), closed.value()) < 1e-8);
      }
    }
  }
  const auto lin = RelativeRiskModel::scalar(RiskForm::Linear, 0.3, 0.0);
  const auto g = FittedDistribution::gamma(1.3, 0.8);
  CHECK(rel(expected_rr(g, lin, std::nullopt, quad).value(), 1.0 + 0.3 * 1.3 * 0.8) < 1e-9);
}

TEST_CASE("expected_rr: divergence is decided analytically") {
  ExpectationOptions quad;
  quad.route = ExpectationRoute::Quadrature;
  for (double mu : {-3.0, 0.0, 2.0}) {
    for (double s : {0.05, 0.5, 3.0}) {
      for (double beta : {1e-6, 0.2, 5.0}) {
        const auto d = FittedDistribution::lognormal(mu, s);
        CHECK(expected_rr(d, exp_model(beta)).is_divergent());
        CHECK(expected_rr(d, exp_model(beta), std::nullopt, quad).is_divergent());
        CHECK(expected_rr(d.with_zero_mass(0.3), exp_model(beta)).is_divergent());
      }
    }
  }
  CHECK(expected_rr(FittedDistribution::gamma(2.0, 2.0), exp_model(0.5)).is_divergent());
  CHECK_FALSE(expected_rr(FittedDistribution::gamma(2.0, 2.0), exp_model(0.49)).is_divergent());
  CHECK(expected_rr(FittedDistribution::weibull(0.9, 1.0), exp_model(0.01)).is_divergent());
  CHECK(expected_rr(FittedDistribution::weibull(1.0, 2.0), exp_model(0.5)).is_divergent());
  CHECK_FALSE(expected_rr(FittedDistribution::weibull(1.0, 2.0), exp_model(0.4)).is_divergent());
  CHECK_FALSE(expected_rr(FittedDistribution::weibull(1.5, 2.0), exp_model(3.0)).is_divergent());
  CHECK_FALSE(expected_rr(FittedDistribution::lognormal(0.0, 1.0), exp_model(-0.5)).is_divergent());
  CHECK_FALSE(expected_rr(FittedDistribution::lognormal(0.0, 1.0).truncated(0.0, 30.0), exp_model(1.0)).is_divergent());
  // A zero counterfactual has no tail at all.
  CHECK(expected_rr(FittedDistribution::lognormal(0.0, 1.0), exp_model(1.0), Counterfactual::zero()).value() == 1.0);
}

TEST_CASE("expected_rr with a point mass at zero") {
  const auto d = FittedDistribution::weibull(1.2, 1.66).truncated(0.0, 12.0);
  const double cont = expected_rr(d, exp_model()).value();
  const double mixed = expected_rr(d.with_zero_mass(0.25), exp_model()).value();
  CHECK(rel(mixed, 0.25 + 0.75 * cont) < 1e-14);
  CHECK(expected_rr(d.with_zero_mass(1.0), exp_model()).value() == 1.0);
}

TEST_CASE("pdf and cdf examples") {
  CHECK(std::abs(FittedDistribution::normal(0.0, 1.0).pdf(0.0) - 0.39894) < 1e-5);
  const double theta = 1.7;
  const auto e = FittedDistribution::gamma(1.0, theta);
  CHECK(rel(e.pdf(theta), std::exp(-1.0) / theta) < 1e-14);
  const auto d = FittedDistribution::normal(1.48, 1.38).truncated(0.0, 12.0);
  CHECK(d.cdf(0.0) == 0.0);
  CHECK(d.cdf(12.0) == 1.0);
  CHECK(d.pdf(-0.1) == 0.0);
  CHECK(d.pdf(12.1) == 0.0);
  const double mass = d.window_mass();
  CHECK(rel(d.pdf(1.0), FittedDistribution::normal(1.48, 1.38).parent_pdf(1.0) / mass) < 1e-13);
  const auto z = d.with_zero_mass(0.2);
  CHECK(z.cdf(-1e-9) == 0.0);
  CHECK(z.cdf(0.0) == doctest::Approx(0.2));
  CHECK(z.cdf(12.0) == 1.0);
}

TEST_CASE("window densities integrate to one") {
  const std::vector<FittedDistribution> cases{
      FittedDistribution::normal(1.48, 1.38).as_exposure_model(),
      FittedDistribution::normal(1.56, 1.37).with_folding().truncated(0.0, 12.0),
      FittedDistribution::lognormal(0.05, 0.98).truncated(0.0, 12.0),
      FittedDistribution::gamma(1.41, 0.90).truncated(0.5, 3.0),
      FittedDistribution::weibull(1.20, 1.66).truncated(0.0, 12.0),
      FittedDistribution::weibull(0.8, 2.0).truncated(0.0, 5.0),
      FittedDistribution::gamma(3.0, 0.5),
  };
  numerics::QuadratureOptions opts{1e-13, 1e-12, 400};
  for (const auto& d : cases) {
    const double hi = std::isfinite(d.window_upper()) ? d.window_upper() : d.window_lower() + 200.0;
    const double total = numerics::integrate_gk([&](double x) { return d.pdf(x); }, d.window_lower(), hi, opts).value;
    CHECK(std::abs(total - 1.0) < 1e-8);
    CHECK(rel(d.cdf(0.5 * (d.window_lower() + std::min(hi, 6.0))),
              numerics::integrate_gk([&](double x) { return d.pdf(x); }, d.window_lower(),
                                     0.5 * (d.window_lower() + std::min(hi, 6.0)), opts)
                  .value) < 1e-8);
  }
}

TEST_CASE("sampling matches the distribution function") {
  const std::vector<FittedDistribution> cases{
      FittedDistribution::gamma(1.41, 0.90),
      FittedDistribution::lognormal(0.05, 0.98).truncated(0.0, 12.0),
      FittedDistribution::normal(1.48, 1.38).as_exposure_model(),
      FittedDistribution::normal(1.56, 1.37).with_folding().truncated(0.0, 12.0),
      FittedDistribution::weibull(1.20, 1.66).truncated(0.0, 12.0),
      FittedDistribution::weibull(0.7, 1.0),
  };
  numerics::RandomStream rng(99);
  const std::size_t n = 100000;
  for (const auto& d : cases) {
    const auto x = sample(d, n, rng);
    for (double xi : x) {
      REQUIRE(xi >= d.window_lower());
      REQUIRE(xi <= d.window_upper());
    }
    CHECK(ks_statistic(x, d) < 1.63 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("truncated normal sample mean") {
  const double mu = 1.48, sigma = 1.38, hi = 12.0;
  const auto d = FittedDistribution::normal(mu, sigma).truncated(0.0, hi);
  const double a = (0.0 - mu) / sigma, b = (hi - mu) / sigma;
  const double z = numerics::normal_cdf(b) - numerics::normal_cdf(a);
  const double pa = numerics::normal_pdf(a), pb = numerics::normal_pdf(b);
  const double mean = mu + sigma * (pa - pb) / z;
  const double var = sigma * sigma * (1.0 + (a * pa - b * pb) / z - std::pow((pa - pb) / z, 2));
  numerics::RandomStream rng(3);
  const std::size_t n = 1000000;
  const auto x = sample(d, n, rng);
  const double m = numerics::exact_sum(x) / static_cast<double>(n);
  CHECK(std::abs(m - mean) < 3.0 * std::sqrt(var / static_cast<double>(n)));
}

TEST_CASE("sampling with a point mass and determinism") {
  const auto d = FittedDistribution::weibull(1.2, 1.66).truncated(0.0, 12.0);
  numerics::RandomStream r1(11);
  for (double x : sample(d.with_zero_mass(1.0), 1000, r1)) CHECK(x == 0.0);
  numerics::RandomStream a(42), b(42);
  CHECK(sample(d.with_zero_mass(0.3), 5000, a) == sample(d.with_zero_mass(0.3), 5000, b));
  numerics::RandomStream c(43);
  const auto z = sample(d.with_zero_mass(0.3), 200000, c);
  const double zeros = static_cast<double>(std::count(z.begin(), z.end(), 0.0)) / 200000.0;
  CHECK(std::abs(zeros - 0.3) < 4.0 * std::sqrt(0.3 * 0.7 / 200000.0));
}
