#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace crpmap {

/// log Gamma(x) for x > 0. glibc's lgamma writes the global `signgam`, so the
/// reentrant variant is used where it exists.
inline double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

}  // namespace crpmap
