#pragma once

#include <vector>

#include "adq/dsp/spectral.h"

namespace adq::dsp {

/// C1, the lowest analysed pitch.
inline constexpr double kCqtFmin = 32.70;

struct CqtParams {
  int bins = 100;
  int bins_per_octave = 12;
  double f_min = kCqtFmin;
  int hop = 1024;
  /// Multiplier on the Q * sr / f_k window length. 1 is the textbook constant-Q
  /// kernel; larger values trade time resolution for less leakage into neighbouring notes.
  double window_scale = 1.0;
};

/// Q = 1 / (2^(1/B) - 1).
double cqt_q_factor(int bins_per_octave);

/// f_k = f_min * 2^(k/B), k = 0..bins-1.
std::vector<double> cqt_frequencies(const CqtParams& params);

/// Frames centered at multiples of hop: floor(len / hop) + 1.
Eigen::Index cqt_frame_count(std::size_t length, int hop);

/// Constant-Q magnitudes. Bin k correlates a Hann-windowed complex exponential at f_k
/// (window length window_scale * Q * sr / f_k, capped at the clip length, normalized to
/// unit window sum) with the signal around each frame center.
/// Throws ParameterError when the top bin exceeds Nyquist.
Spectrogram cqt(const AudioClip& clip, const CqtParams& params);

}  // namespace adq::dsp
