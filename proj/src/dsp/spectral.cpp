#include "adq/dsp/spectral.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "adq/dsp/fft.h"
#include "adq/error.h"

namespace adq::dsp {

namespace {

constexpr double kMelLinearSlope = 200.0 / 3.0;  // Hz per mel below the break
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = kMelBreakHz / kMelLinearSlope;
const double kMelLogStep = std::log(6.4) / 27.0;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void Spectrogram::validate() const {
  if (bins() < 1 || frames() < 1) throw ParameterError("spectrogram must be non-empty");
  if (static_cast<Eigen::Index>(bin_frequencies.size()) != bins()) {
    throw ParameterError("spectrogram bin frequency count mismatch");
  }
  for (std::size_t i = 1; i < bin_frequencies.size(); ++i) {
    if (!(bin_frequencies[i] > bin_frequencies[i - 1])) {
      throw ParameterError("spectrogram bin frequencies must increase");
    }
  }
  if (!magnitudes.allFinite() || (magnitudes.array() < 0.0).any()) {
    throw ParameterError("spectrogram magnitudes must be finite and non-negative");
  }
}

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n) {
    w[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

int hop_for(int frame_length, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ParameterError("overlap must be in [0, 1)");
  const int hop = static_cast<int>(std::lround(frame_length * (1.0 - overlap)));
  if (hop < 1) throw ParameterError("overlap leaves a hop below one sample");
  return hop;
}

Eigen::Index stft_frame_count(std::size_t length, int frame_length, int hop) {
  const auto len = static_cast<Eigen::Index>(length);
  if (len <= frame_length) return 1;
  return (len - frame_length) / hop + 1;
}

Spectrogram stft(const AudioClip& clip, int frame_length, double overlap, Window) {
  clip.validate();
  if (!is_pow2(frame_length)) throw ParameterError("stft frame length must be a power of two");
  const int hop = hop_for(frame_length, overlap);
  const Eigen::Index frames = stft_frame_count(clip.samples.size(), frame_length, hop);
  const auto window = hann_window(frame_length);
  const RealFft fft(static_cast<std::size_t>(frame_length));

  Spectrogram spec;
  spec.frame_hop = hop;
  spec.frame_length = frame_length;
  spec.sample_rate = clip.sample_rate;
  spec.magnitudes.resize(static_cast<Eigen::Index>(fft.bins()), frames);
  spec.bin_frequencies.resize(fft.bins());
  for (std::size_t k = 0; k < fft.bins(); ++k) {
    spec.bin_frequencies[k] = static_cast<double>(k) * clip.sample_rate / frame_length;
  }

  std::vector<double> frame(static_cast<std::size_t>(frame_length));
  std::vector<std::complex<double>> bins(fft.bins());
  const std::size_t n = clip.samples.size();
  for (Eigen::Index f = 0; f < frames; ++f) {
    const std::size_t start = static_cast<std::size_t>(f) * static_cast<std::size_t>(hop);
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const std::size_t at = start + i;
      frame[i] = at < n ? clip.samples[at] * window[i] : 0.0;
    }
    fft.forward(frame, bins);
    for (std::size_t k = 0; k < bins.size(); ++k) {
      spec.magnitudes(static_cast<Eigen::Index>(k), f) = std::abs(bins[k]);
    }
  }
  return spec;
}

double hz_to_mel(double hz) {
  if (hz < kMelBreakHz) return hz / kMelLinearSlope;
  return kMelBreak + std::log(hz / kMelBreakHz) / kMelLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kMelBreak) return mel * kMelLinearSlope;
  return kMelBreakHz * std::exp(kMelLogStep * (mel - kMelBreak));
}

namespace {

std::vector<double> mel_edges(int sample_rate, int band_count) {
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(band_count + 2));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / (band_count + 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_center_frequencies(int sample_rate, int band_count) {
  const auto edges = mel_edges(sample_rate, band_count);
  return {edges.begin() + 1, edges.end() - 1};
}

Eigen::MatrixXd mel_filterbank(int stft_bins, int sample_rate, int band_count) {
  if (band_count < 1 || stft_bins < 2 || sample_rate <= 0) {
    throw ParameterError("mel_filterbank: need M >= 1, F >= 2, positive rate");
  }
  const auto edges = mel_edges(sample_rate, band_count);
  const double bin_hz = sample_rate / 2.0 / (stft_bins - 1);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(band_count, stft_bins);
  for (int m = 0; m < band_count; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < stft_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb(m, k) = w;
    }
    // Bands narrower than the bin spacing would otherwise be empty; give them the nearest bin.
    if (fb.row(m).sum() <= 0.0) {
      const int k = std::clamp(static_cast<int>(std::lround(mid / bin_hz)), 0, stft_bins - 1);
      fb(m, k) = 1.0;
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Spectrogram& spec, int band_count) {
  const Eigen::MatrixXd fb =
      mel_filterbank(static_cast<int>(spec.bins()), spec.sample_rate, band_count);
  MelSpectrogram mel;
  mel.bands = fb * spec.magnitudes;
  mel.band_count = band_count;
  mel.frame_hop = spec.frame_hop;
  mel.frame_length = spec.frame_length;
  mel.sample_rate = spec.sample_rate;
  return mel;
}

std::vector<double> dct2(std::span<const double> values, int keep) {
  const int m = static_cast<int>(values.size());
  if (keep < 1 || keep > m) throw ParameterError("dct2: need M >= keep >= 1");
  std::vector<double> full(values.size());
  dct2_unnormalized(values, full);
  std::vector<double> out(static_cast<std::size_t>(keep));
  const double s0 = std::sqrt(1.0 / (4.0 * m));
  const double sk = std::sqrt(1.0 / (2.0 * m));
  for (int k = 0; k < keep; ++k) {
    out[static_cast<std::size_t>(k)] = full[static_cast<std::size_t>(k)] * (k == 0 ? s0 : sk);
  }
  return out;
}

Spectrogram log_compress(const Spectrogram& spec, double power, double scale) {
  if (!(power > 0.0) || !(scale > 0.0)) throw ParameterError("log_compress: power, scale > 0");
  Spectrogram out = spec;
  out.magnitudes = (scale * spec.magnitudes.array().pow(power)).log1p().matrix();
  return out;
}

}  // namespace adq::dsp
