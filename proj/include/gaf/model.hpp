#pragma once

#include <complex>
#include <string>
#include <vector>

namespace gaf {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Model weighted Bergman spaces in one complex variable.
// 
// Every orthonormal basis element is a monomial f_k(z) = c_k z^k in the
// holomorphic frame:
//   - Fock level p: c_k = p^{(k+1)/2} / sqrt(k!), weight e^{-p|z|^2},
//     measure dV = dA / pi.
//   - Disc: c_k = sqrt((k+1)/pi), trivial weight, Lebesgue measure on |z| < 1.
//   - CustomSpan: c_k = weights[k] for k < weights.size(), trivial weight,
//     Lebesgue measure (only the finite span is modelled).
class ModelSpace {
 public:
  enum class Kind { fock, disc, custom };

  static ModelSpace fock(int level);
  static ModelSpace disc();
  static ModelSpace custom(std::vector<double> weights);

  Kind kind() const noexcept { return kind_; }
  int level() const noexcept { return level_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  // Complex dimension of the base. Sampling and root finding only exist for n = 1.
  int dimension() const noexcept { return 1; }

  // Largest admissible basis index, or -1 when unbounded.
  int max_index() const noexcept;

  // Radius of the domain (infinity for Fock and CustomSpan).
  double domain_radius() const noexcept;
  bool in_domain(cplx z) const noexcept;

  // log c_k; -inf when c_k = 0.
  double log_coeff(int k) const;

  // phi(z) with frame weight |1|_h^2 = e^{-2 phi}.
  double weight_exponent(cplx z) const noexcept;

  // Curvature metadata.
  double scalar_curvature() const noexcept { return 0.0; }
  double bundle_curvature() const noexcept;   // < 2 pi p for Fock, 0 otherwise
  double chern_density() const noexcept;      // < p / pi for Fock, 0 otherwise

  // Non-fatal construction warnings (e.g. CustomSpan with weight 0 at index 0).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  std::string describe() const;

  friend bool operator==(const ModelSpace&, const ModelSpace&) = default;

 private:
  Kind kind_ = Kind::fock;
  int level_ = 1;
  std::vector<double> weights_;
  std::vector<std::string> warnings_;
};

struct TruncationCertificate {
  int order = 0;          // < N: basis indices 0..N are kept
  double radius = 1.0;    // < r
  double tail_bound = 0;  // < sup_{|z|<=r} of the metric tail beyond N
};

// log of the magnitude and the phase of f_k(z). Never overflows.
struct LogValue {
  double log_abs;
  double phase;
};

LogValue basis_log_eval(const ModelSpace& space, int k, cplx z);

// f_k(z), the frame coefficient of the k-th orthonormal basis element.
// Throws model.overflow when the value is not representable.
cplx basis_eval(const ModelSpace& space, int k, cplx z);

// e^{-2 phi(z)}.
double frame_weight(const ModelSpace& space, cplx z);

struct KernelMode {
  bool truncated = false;
  int order = 0;
  static KernelMode closed_form() { return {}; }
  static KernelMode truncated_at(int n) { return {true, n}; }
};

// Bergman kernel function P(z,z) with the frame weight applied.
double kernel_diag(const ModelSpace& space, cplx z, KernelMode mode = KernelMode::closed_form());

// |P(z,w)| / sqrt(P(z,z) P(w,w)).
double normalized_kernel(const ModelSpace& space, cplx z, cplx w);

// Expected zero density (per unit Lebesgue area) of the standard Gaussian section.
double ek_density(const ModelSpace& space, cplx z);

// Five-point finite-difference version of (1/4pi) Laplacian log K, K the frame sum.
double ek_density_fd(const ModelSpace& space, cplx z, double step = 1e-3, int order = -1);

// log of the frame-coefficient kernel sum K(z) = sum_{k<=order} |f_k(z)|^2.
// order < 0 selects the closed form (Fock, Disc) or the full span (CustomSpan).
double log_frame_kernel(const ModelSpace& space, cplx z, int order = -1);

// Metric tail sum_{k>order} |f_k(z)|^2 e^{-2phi} at |z| = r.
double metric_tail(const ModelSpace& space, int order, double r);

// Minimal N with sup_{|z|<=r} metric tail <= eps.
TruncationCertificate truncation_order(const ModelSpace& space, double r, double eps);

// Largest radius (bisection) at which the tail beyond a fixed order stays <= eps.
TruncationCertificate certificate_for_order(const ModelSpace& space, int order, double eps);

// Five-point Laplacian of a scalar function of z.
template <class F>
double laplacian5(F&& f, cplx z, double h) {
  const double c = f(z);
  const double s = f(z + cplx(h, 0)) + f(z - cplx(h, 0)) + f(z + cplx(0, h)) + f(z - cplx(0, h));
  return (s - 4.0 * c) / (h * h);
}

}  // namespace gaf
