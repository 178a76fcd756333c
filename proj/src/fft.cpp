#include "gaf/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <new>

#include "gaf/error.hpp"

namespace gaf {

namespace {

using cplx = std::complex<double>;

struct FftwBuffer {
  explicit FftwBuffer(int n) : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

// Plans are created once per size under a lock (planning is not thread-safe) and
// then executed concurrently through the new-array interface, which is.
fftw_plan backward_plan(int n) {
  static std::mutex mutex;
  static std::map<int, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  FftwBuffer in(n), out(n);
  fftw_plan plan = fftw_plan_dft_1d(n, in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan) throw numeric_error("fft.plan", "FFTW plan creation failed");
  plans.emplace(n, plan);
  return plan;
}

}  // namespace

void fft_backward(int n, const std::vector<cplx>& folded, std::vector<cplx>& out) {
  FftwBuffer in(n), res(n);
  for (int j = 0; j < n; ++j) {
    in.data[j][0] = folded[j].real();
    in.data[j][1] = folded[j].imag();
  }
  fftw_execute_dft(backward_plan(n), in.data, res.data);
  out.resize(n);
  for (int j = 0; j < n; ++j) out[j] = {res.data[j][0], res.data[j][1]};
}

}  // namespace gaf
