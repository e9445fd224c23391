#include "adq/dsp/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "adq/error.h"

namespace adq::dsp {

namespace {

enum class PlanKind { r2c, c2r, dct2 };

// FFTW's planner is not thread-safe; executing an existing plan on new arrays is.
// Plans are never destroyed, so the raw handles stay valid for the process lifetime.
fftw_plan cached_plan(PlanKind kind, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<PlanKind, std::size_t>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(kind, n);
  if (auto it = plans.find(key); it != plans.end()) return it->second;

  const int size = static_cast<int>(n);
  double* real = fftw_alloc_real(n);
  fftw_complex* cplx = fftw_alloc_complex(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = nullptr;
  switch (kind) {
    case PlanKind::r2c:
      plan = fftw_plan_dft_r2c_1d(size, real, cplx, flags);
      break;
    case PlanKind::c2r:
      plan = fftw_plan_dft_c2r_1d(size, cplx, real, flags);
      break;
    case PlanKind::dct2: {
      double* out = fftw_alloc_real(n);
      plan = fftw_plan_r2r_1d(size, real, out, FFTW_REDFT10, flags);
      fftw_free(out);
      break;
    }
  }
  fftw_free(real);
  fftw_free(cplx);
  if (plan == nullptr) throw Error("fftw: failed to create plan of size " + std::to_string(n));
  plans.emplace(key, plan);
  return plan;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

RealFft::RealFft(std::size_t size)
    : size_(size),
      forward_plan_(cached_plan(PlanKind::r2c, size)),
      inverse_plan_(cached_plan(PlanKind::c2r, size)) {
  if (size < 2) throw ParameterError("fft size must be at least 2");
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != bins()) throw ParameterError("fft: size mismatch");
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != size_) throw ParameterError("ifft: size mismatch");
  // c2r destroys its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

void dct2_unnormalized(std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size() || in.empty()) throw ParameterError("dct2: size mismatch");
  fftw_plan plan = cached_plan(PlanKind::dct2, in.size());
  fftw_execute_r2r(plan, const_cast<double*>(in.data()), out.data());
}

}  // namespace adq::dsp
