#include "adq/dsp/cqt.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "adq/dsp/fft.h"
#include "adq/error.h"

namespace adq::dsp {

namespace {

// Spectral kernel entries below this fraction of a kernel's peak are dropped.
constexpr double kSparsity = 5e-4;

struct SparseKernel {
  std::vector<std::size_t> index;
  std::vector<std::complex<double>> conj_value;  // conj(K[j]) / N
};

struct KernelBank {
  std::size_t fft_size = 0;
  std::vector<SparseKernel> kernels;
};

// The spectral kernel for bin k is the DFT of its windowed complex exponential, centered in
// an fft_size buffer. Correlating a real segment with it reduces, by Parseval, to a sparse
// dot product against the segment's positive-frequency half spectrum.
std::shared_ptr<const KernelBank> build_bank(int sample_rate, const CqtParams& p,
                                             std::size_t cap) {
  const double q = cqt_q_factor(p.bins_per_octave);
  const auto freqs = cqt_frequencies(p);
  std::vector<std::size_t> lengths(freqs.size());
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const auto len =
        static_cast<std::size_t>(std::ceil(p.window_scale * q * sample_rate / freqs[k]));
    lengths[k] = std::clamp<std::size_t>(len, 2, std::max<std::size_t>(cap, 2));
  }
  auto bank = std::make_shared<KernelBank>();
  bank->fft_size = next_pow2(*std::max_element(lengths.begin(), lengths.end()));
  const std::size_t n = bank->fft_size;
  const RealFft fft(n);

  std::vector<double> re(n), im(n);
  std::vector<std::complex<double>> re_hat(fft.bins()), im_hat(fft.bins());
  bank->kernels.resize(freqs.size());
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const std::size_t len = lengths[k];
    const auto window = hann_window(static_cast<int>(len));
    double wsum = 0.0;
    for (double w : window) wsum += w;
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    const std::size_t start = n / 2 - len / 2;
    const double omega = 2.0 * std::numbers::pi * freqs[k] / sample_rate;
    for (std::size_t m = 0; m < len; ++m) {
      const double phase = omega * (static_cast<double>(start + m) - static_cast<double>(n / 2));
      re[start + m] = window[m] / wsum * std::cos(phase);
      im[start + m] = window[m] / wsum * std::sin(phase);
    }
    fft.forward(re, re_hat);
    fft.forward(im, im_hat);
    std::vector<std::complex<double>> spectrum(fft.bins());
    double peak = 0.0;
    for (std::size_t j = 0; j < spectrum.size(); ++j) {
      spectrum[j] = re_hat[j] + std::complex<double>(0.0, 1.0) * im_hat[j];
      peak = std::max(peak, std::abs(spectrum[j]));
    }
    SparseKernel& sk = bank->kernels[k];
    for (std::size_t j = 0; j < spectrum.size(); ++j) {
      if (std::abs(spectrum[j]) >= kSparsity * peak) {
        sk.index.push_back(j);
        sk.conj_value.push_back(std::conj(spectrum[j]) / static_cast<double>(n));
      }
    }
  }
  return bank;
}

std::shared_ptr<const KernelBank> kernel_bank(int sample_rate, const CqtParams& p,
                                              std::size_t clip_length) {
  using Key = std::tuple<int, int, int, double, double, std::size_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const KernelBank>> cache;

  // Only clips shorter than the longest window change the kernels.
  const double q = cqt_q_factor(p.bins_per_octave);
  const auto longest = static_cast<std::size_t>(
      std::ceil(p.window_scale * q * sample_rate / p.f_min));
  const std::size_t cap = std::min(clip_length, longest);
  const Key key{sample_rate, p.bins, p.bins_per_octave, p.f_min, p.window_scale, cap};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto bank = build_bank(sample_rate, p, cap);
  std::lock_guard lock(mutex);
  if (cache.size() > 32) cache.clear();
  return cache.emplace(key, std::move(bank)).first->second;
}

}  // namespace

double cqt_q_factor(int bins_per_octave) {
  return 1.0 / (std::pow(2.0, 1.0 / bins_per_octave) - 1.0);
}

std::vector<double> cqt_frequencies(const CqtParams& params) {
  std::vector<double> f(static_cast<std::size_t>(params.bins));
  for (int k = 0; k < params.bins; ++k) {
    f[static_cast<std::size_t>(k)] =
        params.f_min * std::exp2(static_cast<double>(k) / params.bins_per_octave);
  }
  return f;
}

Eigen::Index cqt_frame_count(std::size_t length, int hop) {
  return static_cast<Eigen::Index>(length / static_cast<std::size_t>(hop)) + 1;
}

Spectrogram cqt(const AudioClip& clip, const CqtParams& params) {
  clip.validate();
  if (params.bins < params.bins_per_octave || params.bins_per_octave < 1) {
    throw ParameterError("cqt: need bins >= bins_per_octave >= 1");
  }
  if (!(params.f_min > 0.0) || params.hop < 1 || !(params.window_scale > 0.0)) {
    throw ParameterError("cqt: f_min, hop and window_scale must be positive");
  }
  const double f_top =
      params.f_min * std::exp2(static_cast<double>(params.bins) / params.bins_per_octave);
  if (f_top > clip.sample_rate / 2.0) {
    throw ParameterError("cqt: top bin " + std::to_string(f_top) + " Hz exceeds Nyquist");
  }

  const auto bank = kernel_bank(clip.sample_rate, params, clip.samples.size());
  const std::size_t n = bank->fft_size;
  const RealFft fft(n);
  const Eigen::Index frames = cqt_frame_count(clip.samples.size(), params.hop);
  const auto len = static_cast<long>(clip.samples.size());

  Spectrogram spec;
  spec.magnitudes.resize(params.bins, frames);
  spec.bin_frequencies = cqt_frequencies(params);
  spec.frame_hop = params.hop;
  spec.frame_length = static_cast<int>(n);
  spec.sample_rate = clip.sample_rate;

  std::vector<double> segment(n);
  std::vector<std::complex<double>> spectrum(fft.bins());
  for (Eigen::Index f = 0; f < frames; ++f) {
    const long start = static_cast<long>(f) * params.hop - static_cast<long>(n / 2);
    bool silent = true;
    for (std::size_t i = 0; i < n; ++i) {
      const long at = start + static_cast<long>(i);
      segment[i] = (at >= 0 && at < len) ? clip.samples[static_cast<std::size_t>(at)] : 0.0;
      silent = silent && segment[i] == 0.0;
    }
    if (silent) {
      spec.magnitudes.col(f).setZero();
      continue;
    }
    fft.forward(segment, spectrum);
    for (int k = 0; k < params.bins; ++k) {
      const SparseKernel& sk = bank->kernels[static_cast<std::size_t>(k)];
      std::complex<double> acc = 0.0;
      for (std::size_t j = 0; j < sk.index.size(); ++j) {
        acc += spectrum[sk.index[j]] * sk.conj_value[j];
      }
      spec.magnitudes(k, f) = std::abs(acc);
    }
  }
  return spec;
}

}  // namespace adq::dsp
