#include "gaf/stats.hpp"

#include <algorithm>
#include <cmath>

#include "gaf/error.hpp"

namespace gaf {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (ph + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n));
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

void RunningStats::add(double x) noexcept {
  if (n_ == 0) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::standard_error() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

LeastSquares least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                           const std::vector<double>& weights) {
  const std::size_t m = rows.size();
  if (m == 0 || y.size() != m || (!weights.empty() && weights.size() != m))
    throw argument_error("stats.argument", "least squares: inconsistent sizes");
  const std::size_t k = rows[0].size();
  if (k == 0 || m < k) throw argument_error("stats.argument", "least squares: fewer observations than unknowns");

  // column-major weighted system
  std::vector<double> a(m * k), b(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != k) throw argument_error("stats.argument", "least squares: ragged design");
    const double sw = weights.empty() ? 1.0 : std::sqrt(weights[i]);
    for (std::size_t j = 0; j < k; ++j) a[j * m + i] = sw * rows[i][j];
    b[i] = sw * y[i];
  }

  std::vector<double> diag(k);
  for (std::size_t j = 0; j < k; ++j) {
    double* col = &a[j * m];
    double norm = 0.0;
    for (std::size_t i = j; i < m; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw numeric_error("stats.rank_deficient", "least squares: design is rank deficient");
    const double alpha = col[j] > 0 ? -norm : norm;
    col[j] -= alpha;
    double vnorm = 0.0;
    for (std::size_t i = j; i < m; ++i) vnorm += col[i] * col[i];
    diag[j] = alpha;
    if (vnorm == 0.0) continue;
    auto reflect = [&](double* v) {
      double s = 0.0;
      for (std::size_t i = j; i < m; ++i) s += col[i] * v[i];
      s = 2.0 * s / vnorm;
      for (std::size_t i = j; i < m; ++i) v[i] -= s * col[i];
    };
    for (std::size_t jj = j + 1; jj < k; ++jj) reflect(&a[jj * m]);
    reflect(b.data());
  }

  LeastSquares out;
  out.coefficients.assign(k, 0.0);
  for (std::size_t jj = k; jj-- > 0;) {
    double s = b[jj];
    for (std::size_t l = jj + 1; l < k; ++l) s -= a[l * m + jj] * out.coefficients[l];
    if (std::abs(diag[jj]) < 1e-300) throw numeric_error("stats.rank_deficient", "least squares: singular R");
    out.coefficients[jj] = s / diag[jj];
  }
  double rss = 0.0;
  for (std::size_t i = k; i < m; ++i) rss += b[i] * b[i];
  out.residual_norm = std::sqrt(rss);

  // (R^T R)^{-1} diagonal via R^{-1}
  const double sigma2 = m > k ? rss / static_cast<double>(m - k) : 0.0;
  std::vector<double> rinv(k * k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = c + 1; r-- > 0;) {
      double s = r == c ? 1.0 : 0.0;
      for (std::size_t l = r + 1; l <= c; ++l) s -= a[l * m + r] * rinv[l * k + c];
      rinv[r * k + c] = s / diag[r];
    }
  }
  out.standard_errors.assign(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    double s = 0.0;
    for (std::size_t c = r; c < k; ++c) s += rinv[r * k + c] * rinv[r * k + c];
    out.standard_errors[r] = std::sqrt(sigma2 * s);
  }
  return out;
}

}  // namespace gaf
