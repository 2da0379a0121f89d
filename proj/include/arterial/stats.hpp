#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace arterial::stats {

inline constexpr double kPi = 3.14159265358979323846;

/// Quantile of already-sorted data by linear interpolation between order
/// statistics (position (n - 1) * p).
[[nodiscard]] inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  double h = static_cast<double>(sorted.size() - 1) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

[[nodiscard]] inline double quantile(std::span<const double> values, double p) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, p);
}

[[nodiscard]] inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  // shifted by the first value, so a constant sample has its exact mean
  double x0 = v.front(), d = 0.0;
  for (double x : v) d += x - x0;
  return x0 + d / static_cast<double>(v.size());
}

/// Sample variance (n - 1 denominator); 0 for a single value.
[[nodiscard]] inline double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

[[nodiscard]] inline double stddev(std::span<const double> v) { return std::sqrt(variance(v)); }

/// log(exp(a_1) + ... + exp(a_n)), stabilised by the maximum.
[[nodiscard]] inline double log_sum_exp(std::span<const double> a) {
  if (a.empty()) return -INFINITY;
  double mx = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : a) s += std::exp(x - mx);
  return mx + std::log(s);
}

/// log(1 + exp(x)) without overflow.
[[nodiscard]] inline double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

[[nodiscard]] inline double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

[[nodiscard]] inline double normal_logpdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * std::log(2.0 * kPi * var) - 0.5 * d * d / var;
}

/// Inverse-gamma with shape a and scale (rate on the precision) b.
[[nodiscard]] inline double inv_gamma_logpdf(double x, double shape, double scale) {
  if (x <= 0.0) return -INFINITY;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

/// Standard logistic density with location mu and scale s.
[[nodiscard]] inline double logistic_logpdf(double x, double mu, double s) {
  double z = (x - mu) / s;
  return -z - std::log(s) - 2.0 * log1p_exp(-z);
}

/// Monte Carlo standard error of the mean by non-overlapping batch means.
[[nodiscard]] inline double batch_means_se(std::span<const double> draws, std::size_t n_batches = 30) {
  std::size_t n = draws.size();
  if (n < 2 * n_batches) {
    return n < 2 ? 0.0 : stddev(draws) / std::sqrt(static_cast<double>(n));
  }
  std::size_t len = n / n_batches;
  std::vector<double> batch(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    batch[b] = mean(draws.subspan(b * len, len));
  }
  return stddev(batch) / std::sqrt(static_cast<double>(n_batches));
}

}  // namespace arterial::stats
