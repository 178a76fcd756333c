#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace gaf {

// Counter-based random stream (Philox4x32-10).
// 
// The key is a hash of the master seed; the stream index occupies the high
// half of the 128-bit counter, so distinct (seed, stream) pairs never share
// an input block. A stream is single-owner state; parallel work clones a
// stream with a new index instead of sharing one.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_; }
  std::uint64_t blocks_used() const noexcept { return block_; }

  RngStream with_index(std::uint64_t stream_index) const { return {seed_, stream_index}; }

  std::uint64_t next_u64();

  // Uniform in (0, 1], 53-bit resolution.
  double uniform_open0();

  // Standard complex Gaussian (X + iY)/sqrt(2): |eta|^2 ~ Exp(1), uniform phase.
  std::complex<double> complex_gaussian();

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Draw one standard complex Gaussian from the stream.
inline std::complex<double> complex_gaussian(RngStream& stream) { return stream.complex_gaussian(); }

}  // namespace gaf
