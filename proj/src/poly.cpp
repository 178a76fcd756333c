#include "gaf/poly.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "gaf/error.hpp"
#include "gaf/fft.hpp"

namespace gaf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

int ScaledPoly::degree() const noexcept {
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
    if (coeffs[k] != cplx(0.0, 0.0)) return k;
  return -1;
}

PolyValue poly_log_eval(const ScaledPoly& p, cplx z) {
  const int d = p.degree();
  if (d < 0) return {kNegInf, 0.0};
  const double az = std::abs(z);
  cplx acc = 0.0;
  if (az <= 1.0) {
    for (int k = d; k >= 0; --k) acc = acc * z + p.coeffs[k];
    const double a = std::abs(acc);
    return {a == 0.0 ? kNegInf : p.log_scale + std::log(a), std::arg(acc)};
  }
  // P(z) = z^d Q(1/z), Q(w) = sum_k c_k w^{d-k}
  const cplx w = 1.0 / z;
  for (int k = 0; k <= d; ++k) acc = acc * w + p.coeffs[k];
  const double a = std::abs(acc);
  if (a == 0.0) return {kNegInf, 0.0};
  return {p.log_scale + d * std::log(az) + std::log(a), std::arg(acc) + d * std::arg(z)};
}

cplx newton_ratio(const ScaledPoly& p, cplx z) {
  const int d = p.degree();
  if (d <= 0) return {0.0, 0.0};
  if (std::abs(z) <= 1.0) {
    cplx v = p.coeffs[d], dv = 0.0;
    for (int k = d - 1; k >= 0; --k) {
      dv = dv * z + v;
      v = v * z + p.coeffs[k];
    }
    return v / dv;
  }
  // P/P' = z / (d - w Q'(w)/Q(w)) with w = 1/z
  const cplx w = 1.0 / z;
  cplx q = p.coeffs[0], dq = 0.0;
  for (int k = 1; k <= d; ++k) {
    dq = dq * w + q;
    q = q * w + p.coeffs[k];
  }
  return z / (static_cast<double>(d) - w * dq / q);
}

CircleValues circle_values(const ScaledPoly& p, double r, int nodes, bool with_derivative) {
  if (nodes < 1) throw argument_error("poly.argument", "need at least one node");
  const int d = p.degree();
  CircleValues cv;
  if (d < 0) {
    cv.log_scale = kNegInf;
    cv.values.assign(nodes, 0.0);
    if (with_derivative) cv.zderiv.assign(nodes, 0.0);
    return cv;
  }
  const double lr = std::log(r);
  std::vector<double> lb(d + 1, kNegInf);
  double m = kNegInf;
  for (int k = 0; k <= d; ++k) {
    const double a = std::abs(p.coeffs[k]);
    if (a > 0.0) {
      lb[k] = std::log(a) + k * lr;
      m = std::max(m, lb[k]);
    }
  }
  std::vector<cplx> folded(nodes, 0.0), folded_d;
  if (with_derivative) folded_d.assign(nodes, 0.0);
  for (int k = 0; k <= d; ++k) {
    if (lb[k] == kNegInf) continue;
    const cplx b = std::polar(std::exp(lb[k] - m), std::arg(p.coeffs[k]));
    folded[k % nodes] += b;
    if (with_derivative) folded_d[k % nodes] += static_cast<double>(k) * b;
  }
  cv.log_scale = p.log_scale + m;
  fft_backward(nodes, folded, cv.values);
  if (with_derivative) fft_backward(nodes, folded_d, cv.zderiv);
  return cv;
}

}  // namespace gaf
