#pragma once

#include <cstdint>
#include <vector>

#include "gaf/model.hpp"
#include "gaf/poly.hpp"
#include "gaf/rng.hpp"

namespace gaf {

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Truncated random holomorphic section psi = sum_{k<=N} coefficients[k] S_k.
struct SectionSample {
  ModelSpace space;
  std::vector<cplx> coefficients;
  TruncationCertificate certificate;
  Provenance provenance;

  int order() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
};

// Draws N+1 i.i.d. standard complex Gaussians in ascending index order.
SectionSample sample_section(const ModelSpace& space, const TruncationCertificate& certificate, RngStream& stream);

// Wraps explicit coefficients (constructed tests, Wiener samples).
SectionSample section_from_coefficients(const ModelSpace& space, std::vector<cplx> coefficients,
                                        const TruncationCertificate& certificate, Provenance provenance = {});

struct SectionValue {
  cplx frame_value;
  double metric_norm;
  double log_metric_norm;   // < -inf when the value vanishes
  bool outside_certificate; // < |z| beyond the certificate radius
};

SectionValue eval_section(const SectionSample& sample, cplx z);

// Monomial frame polynomial sum_k eta_k c_k z^k in scaled form.
ScaledPoly frame_polynomial(const SectionSample& sample);

}  // namespace gaf
