#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "hierops/error.hpp"
#include "hierops/rng.hpp"

namespace hierops::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw StatisticsError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) throw StatisticsError("variance needs at least two values");
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

inline double standard_error(std::span<const double> x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

/// Linear-interpolated quantile (type 7) of an unsorted sample.
inline double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw StatisticsError("quantile of empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw StatisticsError("KS needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual.
  double residual = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw StatisticsError("linear fit needs >= 2 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw StatisticsError("linear fit with degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / static_cast<double>(x.size()));
  return fit;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Percentile bootstrap over `count` units: `statistic` receives resampled
/// unit indices. Resamples that throw StatisticsError are skipped.
template <class Statistic>
Interval bootstrap_ci(std::size_t count, Statistic&& statistic, Engine& rng,
                      std::size_t resamples = 400, double level = 0.95) {
  if (count == 0) throw StatisticsError("bootstrap over zero units");
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::vector<double> values;
  values.reserve(resamples);
  std::vector<std::size_t> idx(count);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& i : idx) i = pick(rng);
    try {
      values.push_back(statistic(std::span<const std::size_t>(idx)));
    } catch (const StatisticsError&) {
    }
  }
  if (values.size() < resamples / 2) throw StatisticsError("bootstrap mostly degenerate");
  const double alpha = 0.5 * (1.0 - level);
  return {quantile(values, alpha), quantile(values, 1.0 - alpha)};
}

}  // namespace hierops::stats
