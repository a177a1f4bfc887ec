#include "impactfrac/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "impactfrac/error.hpp"

namespace impactfrac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_gamma(double x) { return boost::math::lgamma(x); }

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

double RiskExpectation::value() const {
  if (divergent_) fail(ErrorCode::InvalidArgument, "expected relative risk is divergent");
  return value_;
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Gamma: return "gamma";
    case Family::Lognormal: return "lognormal";
    case Family::Normal: return "normal";
    case Family::Weibull: return "weibull";
  }
  return "unknown";
}

std::string_view to_string(FitMethod method) {
  switch (method) {
    case FitMethod::MoM: return "mom";
    case FitMethod::MLE: return "mle";
    case FitMethod::Manual: return "manual";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "gamma") return Family::Gamma;
  if (lower == "lognormal" || lower == "log-normal") return Family::Lognormal;
  if (lower == "normal") return Family::Normal;
  if (lower == "weibull") return Family::Weibull;
  fail(ErrorCode::InvalidArgument, "unknown distribution family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

FittedDistribution::FittedDistribution(Family family, double first, double second)
    : family_(family), first_(first), second_(second) {
  if (family == Family::Normal || family == Family::Lognormal) {
    if (!std::isfinite(first)) fail(ErrorCode::InvalidArgument, "location must be finite");
    require_positive(second, family == Family::Normal ? "sigma" : "log_sd");
  } else {
    require_positive(first, "shape");
    require_positive(second, "scale");
  }
}

FittedDistribution FittedDistribution::gamma(double shape, double scale) {
  return {Family::Gamma, shape, scale};
}
FittedDistribution FittedDistribution::lognormal(double log_mean, double log_sd) {
  return {Family::Lognormal, log_mean, log_sd};
}
FittedDistribution FittedDistribution::normal(double mean, double sd) {
  return {Family::Normal, mean, sd};
}
FittedDistribution FittedDistribution::weibull(double shape, double scale) {
  return {Family::Weibull, shape, scale};
}
FittedDistribution FittedDistribution::make(Family family, double first, double second) {
  return {family, first, second};
}

FittedDistribution FittedDistribution::truncated(std::optional<double> lower,
                                                 std::optional<double> upper,
                                                 bool renormalize) const {
  if (lower && (!std::isfinite(*lower) || *lower < 0.0)) {
    fail(ErrorCode::InvalidArgument, "lower truncation bound must be finite and >= 0");
  }
  if (upper && std::isnan(*upper)) fail(ErrorCode::InvalidArgument, "upper bound is NaN");
  if (lower && upper && !(*lower < *upper)) {
    fail(ErrorCode::InvalidArgument, "lower truncation bound must be below the upper bound");
  }
  FittedDistribution d = *this;
  d.lower_ = lower;
  d.upper_ = upper;
  d.renormalize_ = renormalize;
  if (!(d.window_mass() > 0.0)) {
    fail(ErrorCode::InvalidArgument, "truncation window carries no probability mass");
  }
  return d;
}

FittedDistribution FittedDistribution::with_zero_mass(double p0) const {
  if (!(p0 >= 0.0 && p0 <= 1.0)) fail(ErrorCode::InvalidArgument, "p0 must lie in [0, 1]");
  FittedDistribution d = *this;
  d.zero_mass_ = p0;
  return d;
}

FittedDistribution FittedDistribution::with_folding(bool folded) const {
  FittedDistribution d = *this;
  d.folded_ = folded;
  return d;
}

FittedDistribution FittedDistribution::with_fit_method(FitMethod method) const {
  FittedDistribution d = *this;
  d.fit_method_ = method;
  return d;
}

FittedDistribution FittedDistribution::as_exposure_model() const {
  if (family_ == Family::Normal && !folded_ && !lower_) {
    return truncated(0.0, upper_, renormalize_);
  }
  return *this;
}

bool FittedDistribution::untruncated() const {
  const bool lower_free = !lower_ || *lower_ <= support_lower();
  const bool upper_free = !upper_ || std::isinf(*upper_);
  return lower_free && upper_free;
}

// ---------------------------------------------------------------------------
// Parent family
// ---------------------------------------------------------------------------

double FittedDistribution::parent_log_pdf(double x) const {
  switch (family_) {
    case Family::Gamma: {
      const double k = first_, theta = second_;
      if (x < 0.0) return kNegInf;
      if (x == 0.0) return k < 1.0 ? kInf : (k == 1.0 ? -std::log(theta) : kNegInf);
      return (k - 1.0) * std::log(x) - x / theta - log_gamma(k) - k * std::log(theta);
    }
    case Family::Lognormal: {
      if (x <= 0.0) return kNegInf;
      const double lx = std::log(x);
      const double z = (lx - first_) / second_;
      return -lx - std::log(second_) - kHalfLog2Pi - 0.5 * z * z;
    }
    case Family::Normal: {
      const double z = (x - first_) / second_;
      return -std::log(second_) - kHalfLog2Pi - 0.5 * z * z;
    }
    case Family::Weibull: {
      const double k = first_, lambda = second_;
      if (x < 0.0) return kNegInf;
      if (x == 0.0) return k < 1.0 ? kInf : (k == 1.0 ? -std::log(lambda) : kNegInf);
      const double lz = std::log(x / lambda);
      return std::log(k) - std::log(lambda) + (k - 1.0) * lz - std::exp(k * lz);
    }
  }
  return kNegInf;
}

double FittedDistribution::parent_pdf(double x) const { return std::exp(parent_log_pdf(x)); }

double FittedDistribution::parent_cdf(double x) const {
  switch (family_) {
    case Family::Gamma:
      return x <= 0.0 ? 0.0 : (std::isinf(x) ? 1.0 : boost::math::gamma_p(first_, x / second_));
    case Family::Lognormal:
      return x <= 0.0 ? 0.0 : numerics::normal_cdf((std::log(x) - first_) / second_);
    case Family::Normal: return numerics::normal_cdf((x - first_) / second_);
    case Family::Weibull:
      return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / second_, first_));
  }
  return 0.0;
}

double FittedDistribution::parent_ccdf(double x) const {
  switch (family_) {
    case Family::Gamma:
      return x <= 0.0 ? 1.0 : (std::isinf(x) ? 0.0 : boost::math::gamma_q(first_, x / second_));
    case Family::Lognormal:
      return x <= 0.0 ? 1.0 : numerics::normal_ccdf((std::log(x) - first_) / second_);
    case Family::Normal: return numerics::normal_ccdf((x - first_) / second_);
    case Family::Weibull: return x <= 0.0 ? 1.0 : std::exp(-std::pow(x / second_, first_));
  }
  return 1.0;
}

double FittedDistribution::parent_quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::DomainError, "quantile requires p in [0, 1]");
  if (p == 0.0) return family_ == Family::Normal ? kNegInf : 0.0;
  if (p == 1.0) return kInf;
  switch (family_) {
    case Family::Gamma: return second_ * boost::math::gamma_p_inv(first_, p);
    case Family::Lognormal: return std::exp(first_ + second_ * numerics::normal_quantile(p));
    case Family::Normal: return first_ + second_ * numerics::normal_quantile(p);
    case Family::Weibull: return second_ * std::pow(-std::log1p(-p), 1.0 / first_);
  }
  return 0.0;
}

double FittedDistribution::parent_mean() const {
  switch (family_) {
    case Family::Gamma: return first_ * second_;
    case Family::Lognormal: return std::exp(first_ + 0.5 * second_ * second_);
    case Family::Normal: return first_;
    case Family::Weibull: return second_ * boost::math::tgamma(1.0 + 1.0 / first_);
  }
  return 0.0;
}

double FittedDistribution::parent_variance() const {
  switch (family_) {
    case Family::Gamma: return first_ * second_ * second_;
    case Family::Lognormal: {
      const double s2 = second_ * second_;
      return std::expm1(s2) * std::exp(2.0 * first_ + s2);
    }
    case Family::Normal: return second_ * second_;
    case Family::Weibull: {
      const double g1 = boost::math::tgamma(1.0 + 1.0 / first_);
      const double g2 = boost::math::tgamma(1.0 + 2.0 / first_);
      return second_ * second_ * (g2 - g1 * g1);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Folded / truncated continuous part
// ---------------------------------------------------------------------------

double FittedDistribution::support_lower() const {
  return (family_ == Family::Normal && !folded_) ? kNegInf : 0.0;
}

double FittedDistribution::base_log_pdf(double x) const {
  if (!folded_ || family_ != Family::Normal) return parent_log_pdf(x);
  if (x < 0.0) return kNegInf;
  return log_add_exp(parent_log_pdf(x), parent_log_pdf(-x));
}

double FittedDistribution::base_cdf(double x) const {
  if (!folded_ || family_ != Family::Normal) return parent_cdf(x);
  if (x <= 0.0) return 0.0;
  return parent_cdf(x) - parent_cdf(-x);
}

double FittedDistribution::base_ccdf(double x) const {
  if (!folded_ || family_ != Family::Normal) return parent_ccdf(x);
  if (x <= 0.0) return 1.0;
  return parent_ccdf(x) + parent_cdf(-x);
}

double FittedDistribution::window_lower() const {
  return std::max(support_lower(), lower_.value_or(kNegInf));
}

double FittedDistribution::window_upper() const { return upper_.value_or(kInf); }

double FittedDistribution::window_mass() const {
  const double lo = window_lower();
  const double hi = window_upper();
  const double f_lo = base_cdf(lo);
  if (f_lo > 0.5) return base_ccdf(lo) - base_ccdf(hi);
  return base_cdf(hi) - f_lo;
}

double FittedDistribution::window_log_pdf(double x) const {
  if (x < window_lower() || x > window_upper()) return kNegInf;
  const double lp = base_log_pdf(x);
  return renormalize_ ? lp - std::log(window_mass()) : lp;
}

double FittedDistribution::pdf(double x) const {
  return (1.0 - zero_mass_) * std::exp(window_log_pdf(x));
}

double FittedDistribution::cdf(double x) const {
  const double lo = window_lower();
  const double hi = window_upper();
  const double mass = window_mass();
  double cont = 0.0;
  if (x >= hi) {
    cont = renormalize_ ? 1.0 : mass;
  } else if (x > lo) {
    const double f_lo = base_cdf(lo);
    const double part =
        f_lo > 0.5 ? base_ccdf(lo) - base_ccdf(x) : base_cdf(x) - f_lo;
    cont = renormalize_ ? part / mass : part;
  }
  const double point = x >= 0.0 ? zero_mass_ : 0.0;
  return std::clamp((1.0 - zero_mass_) * cont + point, 0.0, 1.0);
}

std::string FittedDistribution::describe() const {
  std::ostringstream os;
  os << to_string(family_) << "(";
  switch (family_) {
    case Family::Gamma: os << "shape=" << first_ << ", scale=" << second_; break;
    case Family::Lognormal: os << "log_mean=" << first_ << ", log_sd=" << second_; break;
    case Family::Normal: os << "mean=" << first_ << ", sd=" << second_; break;
    case Family::Weibull: os << "shape=" << first_ << ", scale=" << second_; break;
  }
  os << ")";
  if (folded_) os << " folded";
  if (lower_ || upper_) {
    os << " on [" << window_lower() << ", " << window_upper() << "]"
       << (renormalize_ ? " renormalized" : " unnormalized");
  }
  if (zero_mass_ > 0.0) os << " p0=" << zero_mass_;
  return os.str();
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

FittedDistribution fit_moments(Family family, double mean, double variance) {
  if (!std::isfinite(mean) || !std::isfinite(variance) || !(variance > 0.0)) {
    fail(ErrorCode::InfeasibleMoments, "variance must be positive and moments finite");
  }
  if (family != Family::Normal && !(mean > 0.0)) {
    fail(ErrorCode::InfeasibleMoments,
         std::string(to_string(family)) + " requires a positive mean");
  }
  switch (family) {
    case Family::Gamma:
      return FittedDistribution::gamma(mean * mean / variance, variance / mean)
          .with_fit_method(FitMethod::MoM);
    case Family::Normal:
      return FittedDistribution::normal(mean, std::sqrt(variance)).with_fit_method(FitMethod::MoM);
    case Family::Lognormal: {
      const double s2 = std::log1p(variance / (mean * mean));
      return FittedDistribution::lognormal(std::log(mean) - 0.5 * s2, std::sqrt(s2))
          .with_fit_method(FitMethod::MoM);
    }
    case Family::Weibull: {
      // Squared coefficient of variation is a decreasing function of shape.
      const double cv2 = variance / (mean * mean);
      auto excess = [cv2](double k) {
        return std::expm1(log_gamma(1.0 + 2.0 / k) - 2.0 * log_gamma(1.0 + 1.0 / k)) - cv2;
      };
      double lo = 1.0, hi = 1.0;
      while (excess(lo) < 0.0) {
        lo *= 0.5;
        if (lo < 1e-3) fail(ErrorCode::InfeasibleMoments, "Weibull shape below 1e-3");
      }
      while (excess(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e4) fail(ErrorCode::InfeasibleMoments, "Weibull shape above 1e4");
      }
      if (lo == hi) lo *= 0.5;
      std::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          excess, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
      const double k = 0.5 * (bracket.first + bracket.second);
      const double lambda = mean / boost::math::tgamma(1.0 + 1.0 / k);
      return FittedDistribution::weibull(k, lambda).with_fit_method(FitMethod::MoM);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown family");
}

double log_likelihood(const FittedDistribution& dist, std::span<const double> data) {
  numerics::ExactSum acc;
  for (double x : data) acc.add(dist.parent_log_pdf(x));
  return acc.result();
}

namespace {

struct DataSummary {
  double n = 0.0;
  double sum = 0.0;
  double sum_log = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

DataSummary summarize_positive(std::span<const double> data) {
  if (data.size() < 2) fail(ErrorCode::DegenerateSample, "MLE needs at least two observations");
  numerics::ExactSum s, sl;
  for (double x : data) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      fail(ErrorCode::NonPositiveData, "MLE data must be strictly positive and finite");
    }
    s.add(x);
    sl.add(std::log(x));
  }
  DataSummary d;
  d.n = static_cast<double>(data.size());
  d.sum = s.result();
  d.sum_log = sl.result();
  d.mean = d.sum / d.n;
  numerics::ExactSum ss;
  for (double x : data) ss.add((x - d.mean) * (x - d.mean));
  d.variance = ss.result() / d.n;
  if (!(d.variance > 0.0)) fail(ErrorCode::DegenerateSample, "data have zero variance");
  return d;
}

FittedDistribution fit_closed_form(Family family, std::span<const double> data) {
  std::vector<double> values(data.begin(), data.end());
  if (family == Family::Lognormal) {
    for (double& v : values) v = std::log(v);
  }
  const double n = static_cast<double>(values.size());
  const double mean = numerics::exact_sum(values) / n;
  numerics::ExactSum ss;
  for (double v : values) ss.add((v - mean) * (v - mean));
  const double var = ss.result() / n;
  if (!(var > 0.0)) fail(ErrorCode::DegenerateSample, "data have zero variance");
  return FittedDistribution::make(family, mean, std::sqrt(var)).with_fit_method(FitMethod::MLE);
}

constexpr double kMleTolerance = 1e-6;

void check_stationary(double grad_norm, double loglik) {
  if (!(grad_norm < kMleTolerance * (1.0 + std::abs(loglik)))) {
    fail(ErrorCode::OptimizerDiverged, "MLE did not reach a stationary point");
  }
}

}  // namespace

FittedDistribution fit_mle(Family family, std::span<const double> data) {
  const DataSummary s = summarize_positive(data);
  if (family == Family::Normal || family == Family::Lognormal) {
    return fit_closed_form(family, data);
  }

  const FittedDistribution start = fit_moments(family, s.mean, s.variance);
  Eigen::VectorXd x0(2);
  x0 << std::log(start.parameters()[0]), std::log(start.parameters()[1]);
  const numerics::BfgsOptions opt;

  if (family == Family::Gamma) {
    auto loglik = [&s](const Eigen::VectorXd& z) {
      const double k = std::exp(z[0]), theta = std::exp(z[1]);
      return (k - 1.0) * s.sum_log - s.sum / theta - s.n * log_gamma(k) - s.n * k * z[1];
    };
    auto grad = [&s](const Eigen::VectorXd& z) {
      const double k = std::exp(z[0]), theta = std::exp(z[1]);
      Eigen::VectorXd g(2);
      g[0] = k * (s.sum_log - s.n * boost::math::digamma(k) - s.n * z[1]);
      g[1] = s.sum / theta - s.n * k;
      return g;
    };
    const auto r = numerics::maximize_bfgs(loglik, grad, x0, opt);
    check_stationary(grad(r.argmax).norm(), r.value);
    return FittedDistribution::gamma(std::exp(r.argmax[0]), std::exp(r.argmax[1]))
        .with_fit_method(FitMethod::MLE);
  }

  // Weibull: finite-difference gradient.
  std::vector<double> logs(data.size());
  std::transform(data.begin(), data.end(), logs.begin(), [](double x) { return std::log(x); });
  auto loglik = [&s, &logs](const Eigen::VectorXd& z) {
    const double k = std::exp(z[0]);
    const double log_lambda = z[1];
    double tail = 0.0;
    for (double lx : logs) tail += std::exp(k * (lx - log_lambda));
    return s.n * z[0] - s.n * k * log_lambda + (k - 1.0) * s.sum_log - tail;
  };
  const auto r = numerics::maximize_bfgs(loglik, {}, x0, opt);
  check_stationary(numerics::finite_difference_gradient(loglik, r.argmax).norm(), r.value);
  return FittedDistribution::weibull(std::exp(r.argmax[0]), std::exp(r.argmax[1]))
      .with_fit_method(FitMethod::MLE);
}

// ---------------------------------------------------------------------------
// Expected relative risk
// ---------------------------------------------------------------------------

namespace {

// Whether E[exp(t X)] is infinite for X from the family's upper tail.
bool mgf_diverges(const FittedDistribution& dist, double t) {
  if (!(t > 0.0)) return false;
  const auto [a, b] = dist.parameters();
  switch (dist.family()) {
    case Family::Gamma: return t * b >= 1.0;
    case Family::Lognormal: return true;
    case Family::Normal: return false;
    case Family::Weibull: return a < 1.0 || (a == 1.0 && t * b >= 1.0);
  }
  return false;
}

RiskExpectation continuous_expectation(const FittedDistribution& dist,
                                        const RelativeRiskModel& model, const Counterfactual& g,
                                        const ExpectationOptions& options) {
  const double beta = model.beta()[0];
  const double slope = g.slope();
  const double shift = g.intercept(1)[0];
  const bool clamp = g.clamp_at_zero();
  const bool automatic = options.route == ExpectationRoute::Automatic;
  const double lo = dist.window_lower();
  const double hi = dist.window_upper();

  if (model.form() == RiskForm::Exponential) {
    // Growth rate of beta * g(x) as x -> +inf.
    const double tail = (clamp && slope <= 0.0) ? 0.0 : beta * slope;
    if (std::isinf(hi) && mgf_diverges(dist, tail)) return RiskExpectation::divergent();

    if (automatic && dist.untruncated() && !dist.folded() && !clamp) {
      const double t = beta * slope;
      const double base = beta * shift;
      const auto [a, b] = dist.parameters();
      if (t == 0.0) return RiskExpectation::finite(std::exp(base));
      if (dist.family() == Family::Gamma) {
        return RiskExpectation::finite(std::exp(base - a * std::log1p(-t * b)));
      }
      if (dist.family() == Family::Normal) {
        return RiskExpectation::finite(std::exp(base + t * a + 0.5 * t * t * b * b));
      }
    }
    auto integrand = [&](double x) {
      const double log_density = dist.window_log_pdf(x);
      if (log_density == kNegInf) return 0.0;
      return std::exp(beta * g.apply(x) + log_density);
    };
    return RiskExpectation::finite(
        numerics::integrate_gk(integrand, lo, hi, options.quadrature).value);
  }

  if (automatic && dist.untruncated() && !dist.folded() && !clamp) {
    return RiskExpectation::finite(model.value(slope * dist.parent_mean() + shift));
  }
  auto integrand = [&](double x) {
    const double log_density = dist.window_log_pdf(x);
    if (log_density == kNegInf) return 0.0;
    return model.value(g.apply(x)) * std::exp(log_density);
  };
  return RiskExpectation::finite(
      numerics::integrate_gk(integrand, lo, hi, options.quadrature).value);
}

}  // namespace

RiskExpectation expected_rr(const FittedDistribution& dist, const RelativeRiskModel& model,
                            const std::optional<Counterfactual>& cft,
                            const ExpectationOptions& options) {
  if (model.dimension() != 1) {
    fail(ErrorCode::DimensionMismatch, "parametric expectations need a scalar exposure");
  }
  const Counterfactual g = cft.value_or(Counterfactual::identity());
  const double p0 = dist.zero_mass();
  const double at_zero = model.value(g.apply(0.0));
  if (p0 == 1.0) return RiskExpectation::finite(at_zero);

  const RiskExpectation cont = continuous_expectation(dist, model, g, options);
  if (cont.is_divergent()) return cont;
  return RiskExpectation::finite(p0 * at_zero + (1.0 - p0) * cont.value());
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

double quantile_between(const FittedDistribution& d, double p_lo, double p_hi, double u) {
  const double p = std::clamp(p_lo + u * (p_hi - p_lo), p_lo, p_hi);
  return d.parent_quantile(p);
}

}  // namespace

std::vector<double> sample(const FittedDistribution& dist, std::size_t n,
                           numerics::RandomStream& rng) {
  std::vector<double> out(n, 0.0);
  const double p0 = dist.zero_mass();
  if (p0 == 1.0) return out;

  const double lo = dist.window_lower();
  const double hi = dist.window_upper();
  const bool fold = dist.folded() && dist.family() == Family::Normal;

  // Parent probabilities bounding the window (both mirror images when folded).
  const double f_lo = dist.parent_cdf(lo);
  const double f_hi = dist.parent_cdf(hi);
  const double f_neg_hi = fold ? dist.parent_cdf(-hi) : 0.0;
  const double f_neg_lo = fold ? dist.parent_cdf(-lo) : 0.0;
  const double neg_mass = f_neg_lo - f_neg_hi;
  const double pos_mass = f_hi - f_lo;

  for (auto& x : out) {
    if (p0 > 0.0 && rng.uniform() < p0) continue;
    const double u = rng.uniform();
    double draw;
    if (!fold) {
      draw = quantile_between(dist, f_lo, f_hi, u);
    } else {
      const double v = u * (neg_mass + pos_mass);
      draw = v < neg_mass ? -dist.parent_quantile(std::clamp(f_neg_hi + v, f_neg_hi, f_neg_lo))
                          : dist.parent_quantile(
                                std::clamp(f_lo + (v - neg_mass), f_lo, f_hi));
      draw = std::abs(draw);
    }
    x = std::clamp(draw, lo, hi);
  }
  return out;
}

}  // namespace impactfrac
