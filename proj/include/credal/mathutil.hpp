#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "credal/errors.hpp"

namespace credal {

inline constexpr double kLogClamp = 1e-12;

// Digamma via recurrence into the asymptotic region plus the Stirling series.
inline double digamma(double x) {
  if (!(x > 0.0)) throw domain_error("digamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

// Type-7 empirical quantile (linear interpolation), the fixed convention used
// for all bootstrap quantiles so results are bit-reproducible.
inline double quantile_type7(std::vector<double> xs, double p) {
  if (xs.empty()) throw domain_error("quantile_type7: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw domain_error("quantile_type7: p outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
}

inline double median(std::vector<double> xs) {
  return quantile_type7(std::move(xs), 0.5);
}

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw domain_error("mean_of: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) throw domain_error("sample_sd: need at least two values");
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace credal
