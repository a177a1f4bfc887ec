#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "impactfrac/error.hpp"
#include "impactfrac/numerics.hpp"

using namespace impactfrac;
using namespace impactfrac::numerics;
using Eigen::VectorXd;

TEST_CASE("quadrature: polynomial on the unit interval") {
  const auto r = integrate_gk([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(std::abs(r.value - 1.0 / 3.0) < 1e-12);
  CHECK(r.converged);
  CHECK(r.error_estimate <= std::max(1e-10, 1e-8 * std::abs(r.value)));
}

TEST_CASE("quadrature: exponential decay on a half line") {
  const auto r = integrate_gk([](double x) { return std::exp(-x); }, 0.0, INFINITY);
  CHECK(std::abs(r.value - 1.0) < 1e-8);
}

TEST_CASE("quadrature: gamma moment generating function") {
  const double k = 1.15, theta = 1.29, beta = std::log(1.27);
  auto f = [&](double x) {
    return std::exp(beta * x + (k - 1.0) * std::log(x) - x / theta - std::lgamma(k) -
                    k * std::log(theta));
  };
  const auto r = integrate_gk(f, 0.0, INFINITY, {1e-13, 1e-11, 400});
  const double closed = std::pow(1.0 - beta * theta, -k);
  CHECK(std::abs(r.value - closed) < 1e-8 * closed);
}

TEST_CASE("quadrature: whole real line and mirrored half line") {
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  CHECK(std::abs(integrate_gk(phi, -INFINITY, INFINITY).value - 1.0) < 1e-9);
  CHECK(std::abs(integrate_gk(phi, -INFINITY, 0.0).value - 0.5) < 1e-9);
  CHECK(std::abs(integrate_gk(phi, -INFINITY, 1.0).value - normal_cdf(1.0)) < 1e-9);
}

TEST_CASE("quadrature: polynomials up to degree 22 are integrated exactly") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int degree = static_cast<int>(gen() % 23);
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (auto& v : c) v = coef(gen);
    double a = coef(gen), b = coef(gen);
    if (a > b) std::swap(a, b);
    if (b - a < 1e-3) continue;
    auto p = [&](double x) {
      double s = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
      return s;
    };
    // Antiderivative evaluated with long double Horner.
    auto P = [&](long double x) {
      long double s = 0.0L;
      for (std::size_t i = c.size(); i-- > 0;) s = s * x + static_cast<long double>(c[i]) / (i + 1);
      return s * x;
    };
    const double exact = static_cast<double>(P(b) - P(a));
    const auto r = integrate_gk(p, a, b);
    CHECK(std::abs(r.value - exact) <= 1e-12);
  }
}

TEST_CASE("quadrature: additivity over a split point") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double w = u(gen), s = u(gen);
    auto f = [&](double x) { return std::sin(w * x) * std::exp(-s * x * x) + 1.0 / (1.0 + x * x); };
    const double a = -u(gen), b = u(gen);
    const double c = a + (b - a) * u(gen) / 3.0;
    const auto whole = integrate_gk(f, a, b);
    const auto left = integrate_gk(f, a, c);
    const auto right = integrate_gk(f, c, b);
    const double tol = whole.error_estimate + left.error_estimate + right.error_estimate + 1e-14;
    CHECK(std::abs(whole.value - (left.value + right.value)) <= tol);
  }
}

TEST_CASE("quadrature: budget exhaustion carries the best value") {
  auto f = [](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); };
  QuadratureOptions opt{1e-14, 1e-14, 5};
  const auto r = try_integrate_gk(f, 0.0, 1.0, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.subdivisions <= 5);
  try {
    integrate_gk(f, 0.0, 1.0, opt);
    FAIL("expected QuadratureFailure");
  } catch (const QuadratureFailure& e) {
    CHECK(e.code() == ErrorCode::QuadratureFailure);
    CHECK(std::isfinite(e.best_value()));
    CHECK(e.error_estimate() > 0.0);
  }
}

TEST_CASE("bfgs: one-dimensional concave quadratic") {
  auto f = [](const VectorXd& x) { return -(x[0] - 3.0) * (x[0] - 3.0); };
  const auto r = maximize_bfgs(f, {}, VectorXd::Zero(1));
  CHECK(std::abs(r.argmax[0] - 3.0) < 1e-8);
  CHECK(r.gradient_norm < 1e-8 * (1.0 + std::abs(r.value)));
}

TEST_CASE("bfgs: two-dimensional quadratic with analytic gradient") {
  auto f = [](const VectorXd& x) {
    return -(x[0] - 1.0) * (x[0] - 1.0) - (x[1] + 2.0) * (x[1] + 2.0);
  };
  auto g = [](const VectorXd& x) {
    VectorXd d(2);
    d << -2.0 * (x[0] - 1.0), -2.0 * (x[1] + 2.0);
    return d;
  };
  const auto r = maximize_bfgs(f, g, VectorXd::Zero(2));
  CHECK(std::abs(r.argmax[0] - 1.0) < 1e-8);
  CHECK(std::abs(r.argmax[1] + 2.0) < 1e-8);
}

TEST_CASE("bfgs: concave quadratics finish within dim + 2 iterations") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  for (int dim = 2; dim <= 6; ++dim) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd A(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) A(i, j) = z(gen);
      const Eigen::MatrixXd H = A * A.transpose() + Eigen::MatrixXd::Identity(dim, dim);
      VectorXd center(dim);
      for (int i = 0; i < dim; ++i) center[i] = z(gen);
      auto f = [&](const VectorXd& x) { return -0.5 * (x - center).dot(H * (x - center)); };
      auto g = [&](const VectorXd& x) { return VectorXd(-H * (x - center)); };
      BfgsOptions opt;
      opt.wolfe_c2 = 1e-4;
      opt.tol = 1e-9;
      const auto r = maximize_bfgs(f, g, VectorXd::Zero(dim), opt);
      CHECK(r.iterations <= dim + 2);
      CHECK((r.argmax - center).norm() < 1e-6);
    }
  }
}

TEST_CASE("bfgs: gamma log-likelihood matches a grid-refinement maximizer") {
  // Synthetic sample with fixed sufficient statistics.
  std::mt19937_64 gen(17);
  std::gamma_distribution<double> draw(1.41, 0.90);
  std::vector<double> x(2000);
  for (auto& v : x) v = draw(gen);
  const double n = static_cast<double>(x.size());
  double sx = 0.0, slx = 0.0;
  for (double v : x) {
    sx += v;
    slx += std::log(v);
  }
  auto ll = [&](double k, double theta) {
    return (k - 1.0) * slx - sx / theta - n * std::lgamma(k) - n * k * std::log(theta);
  };
  auto f = [&](const VectorXd& z) { return ll(std::exp(z[0]), std::exp(z[1])); };
  VectorXd x0(2);
  x0 << 0.0, 0.0;
  const auto r = maximize_bfgs(f, {}, x0);
  const double k_hat = std::exp(r.argmax[0]), theta_hat = std::exp(r.argmax[1]);

  // Oracle: repeatedly refined coordinate grid around the best point.
  double bk = 1.0, bt = 1.0, step = 0.5;
  for (int level = 0; level < 40; ++level) {
    double best = -INFINITY, nk = bk, nt = bt;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        const double k = bk + i * step, t = bt + j * step;
        if (k <= 0.0 || t <= 0.0) continue;
        const double v = ll(k, t);
        if (v > best) {
          best = v;
          nk = k;
          nt = t;
        }
      }
    }
    bk = nk;
    bt = nt;
    step *= 0.5;
  }
  CHECK(std::abs(k_hat - bk) < 1e-4);
  CHECK(std::abs(theta_hat - bt) < 1e-4);
}

TEST_CASE("bfgs: unbounded objective diverges") {
  auto f = [](const VectorXd& x) { return x[0]; };
  try {
    maximize_bfgs(f, {}, VectorXd::Zero(1));
    FAIL("expected OptimizerDiverged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OptimizerDiverged);
  }
}

TEST_CASE("bfgs: non-finite start is rejected") {
  auto f = [](const VectorXd& x) { return std::log(x[0]); };
  CHECK_THROWS_AS(maximize_bfgs(f, {}, VectorXd::Constant(1, -1.0)), Error);
}

TEST_CASE("finite differences: step follows cbrt(eps)(1 + |x|)") {
  auto f = [](const VectorXd& x) { return std::sin(x[0]) + x[1] * x[1] * x[1]; };
  VectorXd x(2);
  x << 0.7, -1.3;
  const VectorXd g = finite_difference_gradient(f, x);
  CHECK(std::abs(g[0] - std::cos(0.7)) < 1e-9);
  CHECK(std::abs(g[1] - 3.0 * 1.69) < 1e-8);
}

TEST_CASE("normal: reference values") {
  CHECK(std::abs(normal_quantile(0.975) - 1.959964) < 1e-6);
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(std::abs(normal_pdf(0.0) - 0.3989422804014327) < 1e-15);
}

TEST_CASE("normal: quantile inverts the distribution function") {
  for (double e = -10.0; e <= -0.30103; e += 0.05) {
    const double p = std::pow(10.0, e);
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-12);
    CHECK(std::abs(normal_cdf(normal_quantile(1.0 - p)) - (1.0 - p)) < 1e-12);
  }
}

TEST_CASE("normal: symmetry and monotonicity") {
  double prev = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double c = normal_cdf(x);
    CHECK(c >= prev);
    prev = c;
    CHECK(std::abs(normal_cdf(-x) - (1.0 - c)) <= 1e-15);
  }
}

TEST_CASE("normal: quantile domain") {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    try {
      normal_quantile(p);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainError);
    }
  }
}

TEST_CASE("exact summation: cancellation and order independence") {
  std::vector<double> v{1e100, 1.0, -1e100};
  CHECK(exact_sum(v) == 1.0);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> w(1000);
  for (auto& x : w) x = u(gen) * std::pow(10.0, static_cast<double>(gen() % 20) - 10.0);
  const double s = exact_sum(w);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(w.begin(), w.end(), gen);
    CHECK(exact_sum(w) == s);
  }
  CHECK(exact_sum(std::vector<double>{}) == 0.0);
  CHECK(exact_sum(std::vector<double>(10, 0.1)) == 1.0);
}

TEST_CASE("random streams: determinism and range") {
  RandomStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double ua = a.uniform();
    CHECK(ua == b.uniform());
    CHECK(ua > 0.0);
    CHECK(ua < 1.0);
    differs |= ua != c.uniform();
  }
  CHECK(differs);
  auto d0 = RandomStream::derived(7, 0), d0b = RandomStream::derived(7, 0);
  auto d1 = RandomStream::derived(7, 1);
  const auto x = d0.next_u64();
  CHECK(x == d0b.next_u64());
  CHECK(x != d1.next_u64());
}

TEST_CASE("random streams: normal draws have the requested moments") {
  RandomStream r(9);
  const int n = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal(2.0, 3.0);
    s += z;
    ss += z * z;
  }
  const double mean = s / n, var = ss / n - mean * mean;
  CHECK(std::abs(mean - 2.0) < 4.0 * 3.0 / std::sqrt(n));
  CHECK(std::abs(var - 9.0) < 0.1);
}
