#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaf/linalg.hpp"
#include "gaf/model.hpp"
#include "gaf/rng.hpp"
#include "gaf/section.hpp"
#include "gaf/symbol.hpp"

namespace gaf {

struct QuadratureDiagnostics {
  std::string path;          // < "constant", "radial" or "tensor"
  int radial_nodes = 0;      // < total radial nodes at the accepted level
  int angular_nodes = 0;
  double error_estimate = 0.0;
  double upper_radius = 0.0;
};

// Compression of T_f = P f P to the span of the first N+1 basis elements.
class ToeplitzOperator {
 public:
  const ModelSpace& space() const noexcept { return space_; }
  const SymbolDescriptor& symbol() const noexcept { return symbol_; }
  int order() const noexcept { return size_ - 1; }
  int size() const noexcept { return size_; }

  cplx entry(int j, int k) const { return matrix_[static_cast<std::size_t>(j) * size_ + k]; }
  const std::vector<cplx>& matrix() const noexcept { return matrix_; }

  bool has_spectrum() const noexcept { return eig_.n == size_; }
  // Descending eigenvalues.
  const std::vector<double>& eigenvalues() const;
  // Component k (model basis index) of eigenvector j.
  cplx eigenvector(int k, int j) const;
  const HermitianEig& eigen() const;

  const QuadratureDiagnostics& diagnostics() const noexcept { return diag_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  // Radius inside which the truncated basis captures the metric kernel to 1e-12.
  const TruncationCertificate& certificate() const noexcept { return certificate_; }

 private:
  friend ToeplitzOperator build_toeplitz(const ModelSpace&, const SymbolDescriptor&, int);
  friend void spectrum(ToeplitzOperator&);
  friend double log_weighted_frame(const ToeplitzOperator&, const std::vector<double>&, cplx);
  ToeplitzOperator(ModelSpace space, SymbolDescriptor symbol, int size);

  ModelSpace space_;
  SymbolDescriptor symbol_;
  int size_;
  std::vector<cplx> matrix_;
  HermitianEig eig_;
  std::vector<int> unit_vectors_;  // < basis index of eigenvector j when every eigenvector is a unit vector
  QuadratureDiagnostics diag_;
  std::vector<std::string> warnings_;
  TruncationCertificate certificate_;
};

// T[j,k] = int f f_k conj(f_j) e^{-2 phi} dV for 0 <= j,k <= N.
// Throws toeplitz.quadrature_fail when the quadrature cannot reach 1e-10.
ToeplitzOperator build_toeplitz(const ModelSpace& space, const SymbolDescriptor& f, int N);

struct TraceHs {
  double trace = 0.0;
  double hs_norm = 0.0;
  double independent_trace = 0.0;  // < int f P dV with the closed-form kernel
};

TraceHs trace_and_hs(const ToeplitzOperator& op);

// int f(z) P(z,z) dV by adaptive polar quadrature.
double integrate_against_kernel(const ModelSpace& space, const SymbolDescriptor& f);

// Jacobi eigen-decomposition in place. Throws linalg.eig_fail.
void spectrum(ToeplitzOperator& op);

// log sum_j lambda_j^2 |f~_j(z)|^2 over frame coefficients (no weight).
double log_t2_frame(const ToeplitzOperator& op, cplx z);

// T^2_f(z,z) = sum_j lambda_j^2 |S~_j(z)|_h^2.
double t2_diag(const ToeplitzOperator& op, cplx z);

// (1/4pi) Laplacian of log T^2 over frame coefficients by the 5-point stencil.
// In this combination the frame weight -2phi and the Chern density cancel.
double gamma_f_density(const ToeplitzOperator& op, cplx z, double fd_step = 1e-3);

// Coefficients sum_j eta_j lambda_j V_kj in the model basis, eta_j drawn in eigenvalue order.
SectionSample sample_wiener_section(const ToeplitzOperator& op, RngStream& stream);

struct KernelSplit {
  std::shared_ptr<const ToeplitzOperator> op;
  int null_rank = 0;
  double eps_null = 0.0;
  double gap_ratio = 0.0;  // < smallest |lambda| above eps over largest |lambda| below (inf if one side empty)
  std::vector<int> null_indices;
  bool sandwich_ok = true;
  double sandwich_worst = 0.0;  // < worst relative violation over the grid (<= 0 when satisfied)

  // P_ker(z,z) with the frame weight applied.
  double p_ker(cplx z) const;
  // (1/4pi) Laplacian of log(T^2 + P_ker) over frame coefficients.
  double combined_density(cplx z, double fd_step = 1e-3) const;
  double log_combined_frame(cplx z) const;
};

// eps_null <= 0 selects 1e-8 * max |lambda|. Throws toeplitz.split_ambiguous
// when the gap ratio around eps_null is below 10.
KernelSplit kernel_split(const ModelSpace& space, const SymbolDescriptor& f, int N, double eps_null = -1.0);

nlohmann::json to_json(const ToeplitzOperator& op);

}  // namespace gaf
