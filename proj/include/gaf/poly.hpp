#pragma once

#include <complex>
#include <vector>

namespace gaf {

using cplx = std::complex<double>;

// Polynomial e^{log_scale} * sum_k coeffs[k] z^k with max |coeffs[k]| = 1.
// The scale lives outside so degrees in the hundreds at high Fock levels stay
// inside double range.
struct ScaledPoly {
  double log_scale = 0.0;
  std::vector<cplx> coeffs;

  int degree() const noexcept;  // < index of the last nonzero coefficient, -1 for zero
};

// Value in log-polar form: log|P(z)| (including the scale) and arg P(z).
struct PolyValue {
  double log_abs;
  double phase;
};

PolyValue poly_log_eval(const ScaledPoly& p, cplx z);

// P(z)/P'(z), evaluated through the reversed polynomial when |z| > 1.
cplx newton_ratio(const ScaledPoly& p, cplx z);

// Values on the circle |z| = r at M equispaced nodes z_j = r e^{2 pi i j / M}.
// Actual values are e^{log_scale} * values[j] and e^{log_scale} * zderiv[j] (= z P'(z)).
struct CircleValues {
  double log_scale = 0.0;
  std::vector<cplx> values;
  std::vector<cplx> zderiv;
};

// FFT evaluation; coefficients beyond M are folded modulo M.
CircleValues circle_values(const ScaledPoly& p, double r, int nodes, bool with_derivative);

}  // namespace gaf
