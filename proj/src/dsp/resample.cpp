#include <cmath>
#include <numbers>

#include "adq/dsp/audio.h"
#include "adq/error.h"

namespace adq::dsp {

namespace {

constexpr int kZeroCrossings = 32;
constexpr double kRolloff = 0.95;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Blackman taper over [-1, 1].
double taper(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double a = std::numbers::pi * (u + 1.0);
  return 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  clip.validate();
  if (target_rate <= 0) throw ParameterError("resample: target rate must be positive");
  if (target_rate == clip.sample_rate) return clip;

  const double step = static_cast<double>(clip.sample_rate) / target_rate;
  const double cutoff = kRolloff * std::min(1.0, 1.0 / step);
  const double half_width = kZeroCrossings / cutoff;
  const auto n_in = static_cast<long>(clip.samples.size());
  const auto n_out = static_cast<long>(std::ceil(n_in / step));

  AudioClip out;
  out.id = clip.id;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(std::max<long>(n_out, 1)));
  for (long n = 0; n < n_out; ++n) {
    const double t = n * step;
    const long lo = std::max<long>(0, static_cast<long>(std::ceil(t - half_width)));
    const long hi = std::min<long>(n_in - 1, static_cast<long>(std::floor(t + half_width)));
    double acc = 0.0;
    for (long i = lo; i <= hi; ++i) {
      const double d = t - static_cast<double>(i);
      acc += clip.samples[static_cast<std::size_t>(i)] * cutoff * sinc(cutoff * d) *
             taper(d / half_width);
    }
    out.samples[static_cast<std::size_t>(n)] = std::clamp(acc, -1.0, 1.0);
  }
  return out;
}

}  // namespace adq::dsp
