#include "gaf/section.hpp"

#include <cmath>
#include <limits>

#include "gaf/error.hpp"

namespace gaf {

SectionSample sample_section(const ModelSpace& space, const TruncationCertificate& certificate, RngStream& stream) {
  if (certificate.order < 0) throw argument_error("section.argument", "certificate order must be >= 0");
  if (space.max_index() >= 0 && certificate.order > space.max_index())
    throw argument_error("section.argument", "certificate order exceeds the span dimension");
  SectionSample s{space, {}, certificate, {stream.master_seed(), stream.stream_index()}};
  s.coefficients.reserve(certificate.order + 1);
  for (int k = 0; k <= certificate.order; ++k) s.coefficients.push_back(stream.complex_gaussian());
  return s;
}

SectionSample section_from_coefficients(const ModelSpace& space, std::vector<cplx> coefficients,
                                        const TruncationCertificate& certificate, Provenance provenance) {
  if (coefficients.empty()) throw argument_error("section.argument", "a section needs at least one coefficient");
  return SectionSample{space, std::move(coefficients), certificate, provenance};
}

ScaledPoly frame_polynomial(const SectionSample& sample) {
  const int n = sample.order();
  std::vector<double> lc(n + 1);
  double m = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    lc[k] = sample.space.log_coeff(k);
    const double a = std::abs(sample.coefficients[k]);
    if (a > 0.0 && std::isfinite(lc[k])) m = std::max(m, lc[k] + std::log(a));
  }
  ScaledPoly p;
  p.coeffs.assign(n + 1, 0.0);
  if (!std::isfinite(m)) return p;
  p.log_scale = m;
  for (int k = 0; k <= n; ++k) {
    if (!std::isfinite(lc[k])) continue;
    p.coeffs[k] = sample.coefficients[k] * std::exp(lc[k] - m);
  }
  return p;
}

SectionValue eval_section(const SectionSample& sample, cplx z) {
  const PolyValue v = poly_log_eval(frame_polynomial(sample), z);
  SectionValue out;
  out.outside_certificate = std::abs(z) > sample.certificate.radius;
  const double phi = sample.space.weight_exponent(z);
  if (v.log_abs == -std::numeric_limits<double>::infinity()) {
    out.frame_value = 0.0;
    out.metric_norm = 0.0;
    out.log_metric_norm = v.log_abs;
    return out;
  }
  out.frame_value = std::polar(std::exp(v.log_abs), v.phase);
  out.log_metric_norm = v.log_abs - phi;
  out.metric_norm = std::exp(out.log_metric_norm);
  return out;
}

}  // namespace gaf
