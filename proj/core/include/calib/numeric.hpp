#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "calib/error.hpp"

namespace calib {

// Pairwise (tree) summation. Error grows O(log n) instead of O(n), which
// keeps NLL values stable enough for the optimizer at n ~ 1e6.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.subspan(0, half)) +
         pairwise_sum(values.subspan(half));
}

// log(sum_i exp(x_i)) with max subtraction.
inline double log_sum_exp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - m);
  return m + std::log(acc);
}

// softplus(x) = log(1 + e^x), no overflow for large |x|.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Empirical quantile with linear interpolation between closest ranks
// (the same convention as numpy's default). `q` in [0,1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace calib
