#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "adq/dsp/audio.h"

namespace adq::dsp {

/// Magnitude time-frequency representation, stored bins x frames (column = frame).
struct Spectrogram {
  Eigen::MatrixXd magnitudes;
  std::vector<double> bin_frequencies;  ///< Hz, strictly increasing
  int frame_hop = 0;                    ///< samples
  int frame_length = 0;                 ///< samples
  int sample_rate = kAnalysisRate;

  Eigen::Index bins() const { return magnitudes.rows(); }
  Eigen::Index frames() const { return magnitudes.cols(); }
  double frame_rate() const { return static_cast<double>(sample_rate) / frame_hop; }
  void validate() const;
};

struct MelSpectrogram {
  Eigen::MatrixXd bands;  ///< band_count x frames
  int band_count = 0;
  int frame_hop = 0;
  int frame_length = 0;
  int sample_rate = kAnalysisRate;

  Eigen::Index frames() const { return bands.cols(); }
};

enum class Window { hann };

/// Periodic Hann window of the given length.
std::vector<double> hann_window(int length);

/// Hop in samples implied by a frame length and fractional overlap.
int hop_for(int frame_length, double overlap);

/// Number of STFT frames: floor((len - frame) / hop) + 1, at least 1.
Eigen::Index stft_frame_count(std::size_t length, int frame_length, int hop);

/// Short-time magnitude spectrum, bins 0..frame_length/2, no centering.
/// Clips shorter than one frame are zero-padded to exactly one frame.
Spectrogram stft(const AudioClip& clip, int frame_length, double overlap,
                 Window window = Window::hann);

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters (peak 1) equally spaced on the mel scale over 0..sample_rate/2.
/// Result is band_count x stft_bins.
Eigen::MatrixXd mel_filterbank(int stft_bins, int sample_rate, int band_count);

/// Center frequencies (Hz) of the filters produced by mel_filterbank.
std::vector<double> mel_center_frequencies(int sample_rate, int band_count);

MelSpectrogram mel_spectrogram(const Spectrogram& spec, int band_count);

/// Orthonormal DCT-II, coefficients 0..keep-1.
std::vector<double> dct2(std::span<const double> values, int keep);

/// m -> ln(1 + scale * m^power), elementwise.
Spectrogram log_compress(const Spectrogram& spec, double power, double scale);

}  // namespace adq::dsp
