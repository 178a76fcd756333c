#include "gaf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gaf/error.hpp"

namespace gaf {

namespace {

double off_diagonal_norm(const std::vector<cplx>& a, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += std::norm(a[static_cast<std::size_t>(i) * n + j]);
  return std::sqrt(s);
}

}  // namespace

double hermitian_defect(const std::vector<cplx>& a, int n) {
  double d = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      d = std::max(d, std::abs(a[static_cast<std::size_t>(i) * n + j] - std::conj(a[static_cast<std::size_t>(j) * n + i])));
  return d;
}

HermitianEig hermitian_eig(std::vector<cplx> a, int n, double tol, int max_sweeps) {
  if (n < 0 || a.size() != static_cast<std::size_t>(n) * n)
    throw argument_error("linalg.argument", "matrix size does not match n");
  auto at = [&](int i, int j) -> cplx& { return a[static_cast<std::size_t>(i) * n + j]; };

  HermitianEig out;
  out.n = n;
  std::vector<cplx> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  double fro = 0.0;
  for (const cplx& x : a) fro += std::norm(x);
  fro = std::sqrt(fro);
  const double target = tol * fro;

  double off = off_diagonal_norm(a, n);
  int sweep = 0;
  while (off > target) {
    if (sweep >= max_sweeps) {
      std::ostringstream os;
      os << "Jacobi did not converge in " << max_sweeps << " sweeps (off-diagonal " << off << ")";
      throw numeric_error("linalg.eig_fail", os.str());
    }
    ++sweep;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = at(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0 || mag <= 1e-18 * fro / n) continue;
        // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]] makes the pivot real, then zeroes it
        const cplx ph = apq / mag;
        const double app = at(p, p).real(), aqq = at(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        const cplx sc = s * std::conj(ph), cc = c * std::conj(ph);
        for (int k = 0; k < n; ++k) {
          const cplx akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - sc * akq;
          at(k, q) = s * akp + cc * akq;
        }
        for (int k = 0; k < n; ++k) {
          const cplx apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - std::conj(sc) * aqk;
          at(q, k) = s * apk + std::conj(cc) * aqk;
        }
        at(p, q) = at(q, p) = 0.0;
        at(p, p) = at(p, p).real();
        at(q, q) = at(q, q).real();
        for (int k = 0; k < n; ++k) {
          cplx& vkp = v[static_cast<std::size_t>(k) * n + p];
          cplx& vkq = v[static_cast<std::size_t>(k) * n + q];
          const cplx x = vkp, y = vkq;
          vkp = c * x - sc * y;
          vkq = s * x + cc * y;
        }
      }
    off = off_diagonal_norm(a, n);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return at(i, i).real() > at(j, j).real(); });
  out.values.resize(n);
  out.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    out.values[j] = at(order[j], order[j]).real();
    for (int k = 0; k < n; ++k)
      out.vectors[static_cast<std::size_t>(k) * n + j] = v[static_cast<std::size_t>(k) * n + order[j]];
  }
  out.sweeps = sweep;
  out.off_norm = off;
  return out;
}

}  // namespace gaf
