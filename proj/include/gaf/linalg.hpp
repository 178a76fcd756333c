#pragma once

#include <complex>
#include <vector>

namespace gaf {

using cplx = std::complex<double>;

// Eigen-decomposition A = V diag(values) V* of a Hermitian n x n matrix.
// values descend; vectors is row-major with column j the j-th eigenvector.
struct HermitianEig {
  int n = 0;
  std::vector<double> values;
  std::vector<cplx> vectors;
  int sweeps = 0;
  double off_norm = 0.0;  // < off-diagonal Frobenius norm at exit

  cplx vector(int component, int index) const { return vectors[static_cast<std::size_t>(component) * n + index]; }
};

// Cyclic Jacobi rotations until the off-diagonal norm is <= tol * ||A||_F.
// Throws numeric "linalg.eig_fail" after max_sweeps.
HermitianEig hermitian_eig(std::vector<cplx> a, int n, double tol = 1e-12, int max_sweeps = 100);

// max |A - A*| over entries.
double hermitian_defect(const std::vector<cplx>& a, int n);

}  // namespace gaf
