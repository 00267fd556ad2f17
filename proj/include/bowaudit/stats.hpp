#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bowaudit/error.hpp"

namespace bowaudit::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw DataError("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Inclusive linear interpolation between order statistics (R type 7,
// numpy "linear"): h = (n - 1) p, interpolate between x[floor h] and x[ceil h].
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, p);
}

}  // namespace bowaudit::stats
