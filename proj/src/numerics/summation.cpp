#include <cmath>

#include "impactfrac/numerics.hpp"

namespace impactfrac::numerics {

// Shewchuk, "Adaptive Precision Floating-Point Arithmetic" (1997); same
// scheme as Python's math.fsum. partials_ holds non-overlapping components
// in increasing magnitude whose exact sum is the running total.
void ExactSum::add(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::abs(x) < std::abs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

double ExactSum::result() const {
  if (partials_.empty()) return 0.0;
  auto n = partials_.size();
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Round-half-even correction when the remaining partials push the
  // discarded part past a tie.
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

double exact_sum(std::span<const double> values) {
  ExactSum acc;
  for (double v : values) acc.add(v);
  return acc.result();
}

}  // namespace impactfrac::numerics
