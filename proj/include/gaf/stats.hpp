#pragma once

#include <cstdint>
#include <vector>

namespace gaf {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

// Wilson score interval for a binomial proportion (z = 1.96 gives 95%).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

// Welford accumulator. Merging is exact up to rounding, so ordered
// reductions of per-trial values are reproducible.
class RunningStats {
 public:
  void add(double x) noexcept;
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;  // < unbiased, 0 for fewer than two samples
  double standard_error() const noexcept;
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
  double min_ = 0.0, max_ = 0.0;
};

struct LeastSquares {
  std::vector<double> coefficients;
  std::vector<double> standard_errors;  // < from the weighted residual variance
  double residual_norm = 0.0;
};

// Weighted least squares min sum w_i (y_i - x_i . c)^2 by Householder QR.
// `rows` holds one design row per observation; empty weights mean 1.
LeastSquares least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                           const std::vector<double>& weights = {});

}  // namespace gaf
