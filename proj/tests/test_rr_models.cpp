#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "impactfrac/error.hpp"
#include "impactfrac/rr_models.hpp"

using namespace impactfrac;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

RelativeRiskModel model_of(RiskForm form, const VectorXd& beta) {
  return RelativeRiskModel(form, beta, MatrixXd::Zero(beta.size(), beta.size()));
}

template <typename Code, typename F>
void check_code(Code expected, F&& f) {
  try {
    f();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == expected);
  }
}

}  // namespace

TEST_CASE("rr_value examples") {
  const auto e = RelativeRiskModel::scalar(RiskForm::Exponential, std::log(1.27), 0.0);
  CHECK(std::abs(e.value(1.0) - 1.27) < 1e-15);
  CHECK(e.value(0.0) == 1.0);
  const auto l = RelativeRiskModel::scalar(RiskForm::Linear, 0.5, 0.0);
  CHECK(l.value(2.0) == 2.0);
  CHECK(l.value(0.0) == 1.0);
}

TEST_CASE("rr_value is exactly one at zero exposure") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    for (auto form : {RiskForm::Exponential, RiskForm::Linear}) {
      const auto m = model_of(form, vec({z(gen), z(gen), z(gen)}));
      CHECK(m.value(VectorXd::Zero(3)) == 1.0);
    }
  }
}

TEST_CASE("rr_value errors") {
  const auto m = model_of(RiskForm::Exponential, vec({0.1, 0.2}));
  check_code(ErrorCode::DimensionMismatch, [&] { m.value(VectorXd::Zero(3)); });
  const auto l = RelativeRiskModel::scalar(RiskForm::Linear, -1.0, 0.0);
  check_code(ErrorCode::NonPositiveRisk, [&] { l.value(1.0); });
  check_code(ErrorCode::NonPositiveRisk, [&] { l.value(2.0); });
}

TEST_CASE("rr_grad_beta examples") {
  const auto e0 = RelativeRiskModel::scalar(RiskForm::Exponential, 0.0, 0.0);
  CHECK(e0.grad_beta(vec({3.0}))[0] == 3.0);
  const auto l = model_of(RiskForm::Linear, vec({0.2, 0.2}));
  CHECK(l.grad_beta(vec({1.0, 2.0})) == vec({1.0, 2.0}));
  const auto e2 = RelativeRiskModel::scalar(RiskForm::Exponential, std::log(2.0), 0.0);
  CHECK(std::abs(e2.grad_beta(vec({1.0}))[0] - 2.0) < 1e-15);
}

TEST_CASE("rr_hess_x examples") {
  const auto l = model_of(RiskForm::Linear, vec({0.3, -0.1}));
  CHECK(l.hess_x(vec({1.0, 2.0})).isZero(0.0));
  const auto e = RelativeRiskModel::scalar(RiskForm::Exponential, std::log(1.27), 0.0);
  const double b = std::log(1.27);
  CHECK(std::abs(e.hess_x(vec({1.48}))(0, 0) - b * b * std::exp(b * 1.48)) < 1e-15);
  CHECK(std::abs(e.hess_x(vec({1.48}))(0, 0) - 0.08138) < 5e-5);
  CHECK(model_of(RiskForm::Exponential, vec({0.0})).hess_x(vec({4.0})).isZero(0.0));
}

TEST_CASE("gradient and Hessian agree with central differences at random points") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const int k = 1 + static_cast<int>(gen() % 3);
    VectorXd beta(k), x(k);
    for (int i = 0; i < k; ++i) {
      beta[i] = 2.0 * u(gen);
      x[i] = 2.0 * u(gen);
    }
    if (std::abs(beta.dot(x)) > 5.0) continue;
    for (auto form : {RiskForm::Exponential, RiskForm::Linear}) {
      const auto m = model_of(form, beta);
      if (form == RiskForm::Linear && 1.0 + beta.dot(x) <= 0.2) continue;
      const VectorXd g = m.grad_beta(x);
      const MatrixXd H = m.hess_x(x);
      for (int i = 0; i < k; ++i) {
        const double h = 1e-5 * (1.0 + std::abs(beta[i]));
        VectorXd bp = beta, bm = beta;
        bp[i] += h;
        bm[i] -= h;
        const double fd = (model_of(form, bp).value(x) - model_of(form, bm).value(x)) / (2 * h);
        CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
        for (int j = 0; j < k; ++j) {
          auto shifted = [&](double di, double dj) {
            VectorXd y = x;
            y[i] += di;
            y[j] += dj;
            return m.value(y);
          };
          auto second = [&](double hx) {
            return (shifted(hx, hx) - shifted(hx, -hx) - shifted(-hx, hx) + shifted(-hx, -hx)) /
                   (4 * hx * hx);
          };
          // Richardson extrapolation of the mixed central difference.
          const double fd2 = (4.0 * second(1e-3) - second(2e-3)) / 3.0;
          CHECK(std::abs(fd2 - H(i, j)) <= 1e-6 * std::max(1.0, std::abs(H(i, j))));
        }
      }
      CHECK(H.isApprox(H.transpose()));
    }
    ++checked;
  }
}

TEST_CASE("exponential form is monotone for positive beta") {
  const auto m = RelativeRiskModel::scalar(RiskForm::Exponential, 0.4, 0.0);
  double prev = 0.0;
  for (double x = -5.0; x <= 5.0; x += 0.01) {
    CHECK(m.value(x) >= prev);
    prev = m.value(x);
  }
}

TEST_CASE("model construction validates the covariance") {
  check_code(ErrorCode::DimensionMismatch,
             [] { RelativeRiskModel(RiskForm::Exponential, vec({1.0, 2.0}), MatrixXd::Zero(1, 1)); });
  MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  check_code(ErrorCode::InvalidArgument,
             [&] { RelativeRiskModel(RiskForm::Exponential, vec({1.0, 2.0}), asym); });
  MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  check_code(ErrorCode::InvalidArgument,
             [&] { RelativeRiskModel(RiskForm::Exponential, vec({1.0, 2.0}), indefinite); });
}

TEST_CASE("relative risk and interval convert to beta and se") {
  const auto m = RelativeRiskModel::from_relative_risk(1.27, 1.16, 1.38);
  CHECK(std::abs(m.beta()[0] - std::log(1.27)) < 1e-15);
  CHECK(std::abs(std::sqrt(m.beta_cov()(0, 0)) - 0.0443) < 1e-4);
  check_code(ErrorCode::InvalidArgument, [] { RelativeRiskModel::from_relative_risk(1.27, 1.4, 1.3); });
}

TEST_CASE("cft_apply examples") {
  CHECK(std::abs(Counterfactual::scale(0.6).apply(2.0) - 1.2) < 1e-15);
  CHECK(Counterfactual::identity().apply(5.0) == 5.0);
  CHECK(Counterfactual::shift(-2.0, 1, true).apply(1.0) == 0.0);
  CHECK(Counterfactual::shift(-2.0, 1).apply(1.0) == -1.0);
  const VectorXd x = vec({1.5, -2.25, 1e300});
  CHECK(Counterfactual::identity().apply(x) == x);
  CHECK(Counterfactual::zero().apply(x) == VectorXd::Zero(3));
  check_code(ErrorCode::DimensionMismatch, [&] { Counterfactual::shift(vec({1.0, 2.0})).apply(x); });
}

TEST_CASE("cft_derivs examples") {
  const auto s = Counterfactual::scale(0.6).derivatives(vec({2.0}));
  CHECK(s.jacobian(0, 0) == 0.6);
  CHECK(s.hessians[0].isZero(0.0));
  const auto sh = Counterfactual::shift(-2.0, 1).derivatives(vec({5.0}));
  CHECK(sh.jacobian(0, 0) == 1.0);
  CHECK(sh.hessians[0].isZero(0.0));
  const auto z = Counterfactual::zero().derivatives(vec({5.0}));
  CHECK(z.jacobian(0, 0) == 0.0);
  const auto id = Counterfactual::identity().derivatives(vec({1.0, 2.0}));
  CHECK(id.jacobian.isIdentity(0.0));
  CHECK(id.hessians.size() == 2);
}

TEST_CASE("clamped counterfactuals are not differentiable at the kink") {
  const auto c = Counterfactual::shift(-2.0, 1, true);
  CHECK(c.differentiable_at(vec({5.0})));
  CHECK_FALSE(c.differentiable_at(vec({2.0})));
  check_code(ErrorCode::NonDifferentiableAtPoint, [&] { c.derivatives(vec({1.0})); });
  CHECK(c.derivatives(vec({5.0})).jacobian(0, 0) == 1.0);
}

TEST_CASE("counterfactual descriptions") {
  CHECK(Counterfactual::zero().describe() == "zero");
  CHECK(Counterfactual::scale(0.5).describe() == "scale:0.5");
  CHECK(Counterfactual::shift(-2.0, 1, true).describe() == "shift:-2+clamp");
}
