#pragma once

#include <complex>
#include <vector>

namespace gaf {

// out[j] = sum_k in[k] e^{+2 pi i j k / n}, n = in.size(). Safe to call concurrently.
void fft_backward(int n, const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out);

}  // namespace gaf
