#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gaf/poly.hpp"
#include "gaf/section.hpp"

namespace gaf {

enum class ZeroStatus {
  valid,
  boundary_ambiguous,  // < a root sits within 1e-8 r of the circle
  nonconverged,        // < Aberth iteration hit its iteration cap
  count_mismatch,      // < argument principle disagrees with the located roots
  contour_unresolved,  // < trapezoid sum not close to an integer
  residual_fail,       // < polished residual above 1e-9 max_{|z|=r}|psi|
};

const char* to_string(ZeroStatus s) noexcept;

struct Root {
  cplx position;
  int multiplicity = 1;
};

struct ZeroValidation {
  int argument_count = 0;
  double max_newton_residual = 0.0;  // < relative to max_{|z|=r} |psi|
  ZeroStatus status = ZeroStatus::valid;
};

struct ZeroSet {
  std::vector<Root> roots;
  double domain_radius = 0.0;
  ZeroValidation validation;

  int total_multiplicity() const noexcept;
  bool valid() const noexcept { return validation.status == ZeroStatus::valid; }
};

// Real test function with compact support in |z| <= support_radius.
struct TestForm {
  std::function<double(cplx)> eval;
  double support_radius = 0.0;
  std::string name;

  // (1 - |z-c|^2/R^2)^2 inside |z - c| <= R, 0 outside.
  static TestForm bump(double radius, cplx center = {});
  static TestForm zero(double radius);
  // Closed-form integral of the bump against Lebesgue area: pi R^2 / 3.
  static double bump_area_integral(double radius);
};

struct AberthOptions {
  int max_iterations = 200;
  double tolerance = 1e-13;  // < relative correction size
};

struct AberthResult {
  std::vector<cplx> roots;
  int iterations = 0;
  bool converged = false;
};

// All roots of a polynomial by Aberth-Ehrlich simultaneous iteration,
// started from the Newton-polygon radii of the coefficients.
AberthResult aberth_roots(const ScaledPoly& poly, const AberthOptions& options = {});

inline constexpr int kMaxDegree = 512;

// Number of contour nodes used for a section of order N: max(256, 32 N).
int contour_nodes(int order);

// Zeros of the truncated frame polynomial inside |z| <= r, cross-checked by
// the argument principle.
ZeroSet roots_in_disk(const SectionSample& sample, double r);

// Degree of the divisor in the disk by the argument principle.
// Throws zeros.contour_near_zero / zeros.contour_unresolved.
int count_zeros_argument(const SectionSample& sample, double r);
int count_zeros_argument(const ScaledPoly& poly, double r, int nodes);

struct Pairing {
  double value = 0.0;
  bool truncated_support = false;  // < support extends past the zero-set disk
};

// sum_i m_i phi(z_i). Requires a valid zero set.
Pairing pair_divisor(const ZeroSet& zs, const TestForm& phi);

// True iff the section has no zeros in |z| <= r.
bool hole_indicator(const SectionSample& sample, double r);

// Weighted (2n-2)-volume of the divisor in |z| <= region_radius; for n = 1 the zero count.
double volume_codim1(const ZeroSet& zs, double region_radius);

}  // namespace gaf
