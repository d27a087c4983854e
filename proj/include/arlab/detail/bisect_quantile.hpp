#pragma once

#include <algorithm>
#include <cmath>

#include "arlab/errors.hpp"

namespace arlab {

template <typename Cdf>
double bisect_quantile(const Cdf& cdf, double t, double scale) {
  if (!(t > 0.0 && t < 1.0)) throw InvalidInput("quantile level must lie in (0, 1)");
  double lo = -scale;
  double hi = scale;
  while (cdf(lo) >= t) {
    hi = lo;
    lo *= 2.0;
    if (!std::isfinite(lo)) throw InvalidInput("quantile bracket diverged");
  }
  while (cdf(hi) < t) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw InvalidInput("quantile bracket diverged");
  }
  // Invariant: cdf(lo) < t <= cdf(hi).
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace arlab
