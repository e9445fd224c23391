#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace adq::dsp {

/// Real <-> half-complex transforms of a fixed size, backed by FFTW.
/// Plans are created once per size under a global lock; execution is
/// reentrant, so one instance may be shared across threads.
class RealFft {
 public:
  explicit RealFft(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  std::size_t bins() const noexcept { return size_ / 2 + 1; }

  /// Unnormalized forward DFT of `in` (size()) into `out` (bins()).
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

  /// Unnormalized inverse: `out` receives size() * ifft(in).
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Unnormalized DCT-II: y[k] = 2 * sum_n x[n] cos(pi (2n + 1) k / 2N).
void dct2_unnormalized(std::span<const double> in, std::span<double> out);

std::size_t next_pow2(std::size_t n);

}  // namespace adq::dsp
