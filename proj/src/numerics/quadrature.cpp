#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "impactfrac/error.hpp"
#include "impactfrac/numerics.hpp"

namespace impactfrac::numerics {

namespace {

// Kronrod abscissae (non-negative half). Odd indices are the embedded
// 7-point Gauss abscissae.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

// One GK15 application on [a, b] with the QUADPACK error heuristic.
Segment apply_rule(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<double, 15> fv{};
  const double fc = f(center);
  fv[7] = fc;
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);

  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    kronrod += kKronrodWeights[j] * (f1 + f2);
    abs_sum += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }

  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    asc += kKronrodWeights[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }

  const double value = kronrod * half;
  const double res_abs = abs_sum * std::abs(half);
  const double res_asc = asc * std::abs(half);
  double error = std::abs((kronrod - gauss) * half);
  if (res_asc != 0.0 && error != 0.0) {
    error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();
  if (res_abs > tiny / (50.0 * eps)) error = std::max(50.0 * eps * res_abs, error);
  return {a, b, value, error};
}

QuadratureResult adaptive(const Integrand& f, double a, double b,
                          const QuadratureOptions& options) {
  std::priority_queue<Segment> heap;
  heap.push(apply_rule(f, a, b));
  int subdivisions = 0;

  QuadratureResult result;
  for (;;) {
    // Re-sum from scratch so the totals never drift.
    double total = 0.0;
    double total_error = 0.0;
    auto copy = heap;
    while (!copy.empty()) {
      total += copy.top().value;
      total_error += copy.top().error;
      copy.pop();
    }
    result.value = total;
    result.error_estimate = total_error;
    result.subdivisions = subdivisions;

    if (!std::isfinite(total) || !std::isfinite(total_error)) {
      result.converged = false;
      return result;
    }
    if (total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total))) {
      result.converged = true;
      return result;
    }
    if (subdivisions >= options.max_subdivisions) {
      result.converged = false;
      return result;
    }

    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further in floating point.
      result.converged = false;
      return result;
    }
    heap.push(apply_rule(f, worst.a, mid));
    heap.push(apply_rule(f, mid, worst.b));
    ++subdivisions;
  }
}

}  // namespace

QuadratureResult try_integrate_gk(const Integrand& f, double a, double b,
                                  const QuadratureOptions& options) {
  if (std::isnan(a) || std::isnan(b)) fail(ErrorCode::DomainError, "integration limit is NaN");
  if (a == b) return {0.0, 0.0, 0, true};
  if (a > b) {
    auto r = try_integrate_gk(f, b, a, options);
    r.value = -r.value;
    return r;
  }

  const bool lower_inf = std::isinf(a);
  const bool upper_inf = std::isinf(b);

  if (!lower_inf && !upper_inf) return adaptive(f, a, b, options);

  if (!lower_inf && upper_inf) {
    // x = a + t / (1 - t), dx = dt / (1 - t)^2
    auto g = [&f, a](double t) {
      const double u = 1.0 - t;
      return f(a + t / u) / (u * u);
    };
    return adaptive(g, 0.0, 1.0, options);
  }

  if (lower_inf && !upper_inf) {
    auto g = [&f, b](double t) {
      const double u = 1.0 - t;
      return f(b - t / u) / (u * u);
    };
    return adaptive(g, 0.0, 1.0, options);
  }

  auto g = [&f](double t) {
    const double u = 1.0 - t;
    const double x = t / u;
    return (f(x) + f(-x)) / (u * u);
  };
  return adaptive(g, 0.0, 1.0, options);
}

QuadratureResult integrate_gk(const Integrand& f, double a, double b,
                              const QuadratureOptions& options) {
  auto r = try_integrate_gk(f, a, b, options);
  if (!r.converged) throw QuadratureFailure(r.value, r.error_estimate, r.subdivisions);
  return r;
}

}  // namespace impactfrac::numerics
