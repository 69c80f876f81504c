#pragma once

#include <cmath>
#include <span>

namespace oracle {

struct Moments {
  double mean, variance, skewness, kurtosis;
};

// Explicit mean, then explicit central sums, in extended precision.
inline Moments two_pass_moments(std::span<const double> x) {
  const auto n = static_cast<long double>(x.size());
  long double s = 0.0L;
  for (double v : x) s += v;
  const long double mu = s / n;
  long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
  for (double v : x) {
    const long double d = v - mu;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0L) return {static_cast<double>(mu), 0.0, 0.0, 0.0};
  return {static_cast<double>(mu), static_cast<double>(m2),
          static_cast<double>(m3 / std::pow(m2, 1.5L)), static_cast<double>(m4 / (m2 * m2))};
}

}  // namespace oracle
