// Sample moments and percentile bootstrap.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fppflow/capacity_field.hpp"

namespace fppflow {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased sample variance
  double m4 = 0.0;        ///< fourth central moment (biased)

  double std_error() const { return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0; }

  /// Approximate standard error of the sample variance.
  double variance_std_error() const {
    if (count < 2) return 0.0;
    double n = static_cast<double>(count);
    double s4 = variance * variance;
    double v = (m4 - s4 * (n - 3.0) / (n - 1.0)) / n;
    return std::sqrt(std::max(v, 0.0));
  }
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  if (*mn == *mx) {
    s.mean = *mn;
    return s;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0, s4 = 0.0;
  for (double x : xs) {
    double d = x - s.mean;
    ss += d * d;
    s4 += d * d * d * d;
  }
  s.variance = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  s.m4 = s4 / static_cast<double>(xs.size());
  return s;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

/// Uniform index in [0, n) from 64 random bits.
inline std::size_t bounded_index(std::uint64_t bits, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

/// Percentile bootstrap interval for the mean.
inline Interval bootstrap_mean_ci(std::span<const double> xs, std::size_t resamples, std::uint64_t seed,
                                  double level = 0.95) {
  if (xs.empty()) return {};
  auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  if (*mn == *mx || resamples == 0) return {xs[0], xs[0]};
  std::vector<double> means;
  means.reserve(resamples);
  std::uint64_t counter = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) sum += xs[bounded_index(counter_bits(seed, counter++), xs.size())];
    means.push_back(sum / static_cast<double>(xs.size()));
  }
  std::sort(means.begin(), means.end());
  double alpha = (1.0 - level) / 2.0;
  return {quantile_sorted(means, alpha), quantile_sorted(means, 1.0 - alpha)};
}

}  // namespace fppflow
