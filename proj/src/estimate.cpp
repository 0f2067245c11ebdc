#include "pla/estimate.hpp"

#include <algorithm>
#include <cmath>

namespace pla {

SerEstimate make_estimate(std::uint64_t errors, std::uint64_t trials, double z) {
  SerEstimate e;
  e.errors = errors;
  e.trials = trials;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  e.rate = p;
  e.lo = errors == 0 ? 0.0 : std::max(0.0, std::min(p, centre - half));
  e.hi = errors == trials ? 1.0 : std::min(1.0, std::max(p, centre + half));
  return e;
}

}  // namespace pla
