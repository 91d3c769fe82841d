#pragma once

#include <cmath>
#include <numeric>
#include <span>

namespace synthts {

inline double sample_mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// True when every value is equal. Demeaning a constant like 0.3 can leave
/// rounding residue, so zero-variance checks test this directly.
inline bool is_constant(std::span<const double> x) {
  for (double v : x)
    if (v != x.front()) return false;
  return true;
}

/// Realized standard deviation, n-1 divisor. Zero for fewer than two values.
inline double sample_std(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace synthts
