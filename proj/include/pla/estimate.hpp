#pragma once

#include <cstdint>

namespace pla {

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Empirical error rate with a Wilson score interval.
struct SerEstimate {
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
  double rate = 0.0;
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double p) const { return lo <= p && p <= hi; }
};

/// Wilson interval; an empty sample gives rate 0 and [0, 1].
SerEstimate make_estimate(std::uint64_t errors, std::uint64_t trials,
                          double z = kZ95);

}  // namespace pla
