#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "adq/dsp/audio.h"
#include "adq/dsp/spectral.h"

namespace adq::features {

/// Per-frame features, D x N (column = frame).
struct FrameFeatureSequence {
  Eigen::MatrixXd values;
  std::vector<std::string> feature_names;

  Eigen::Index dims() const { return values.rows(); }
  Eigen::Index frames() const { return values.cols(); }
};

/// Mean/variance over blocks of per-block [mean; upper-triangular covariance] vectors.
struct BlockSummary {
  std::vector<double> values;  ///< 2 * (D + D(D+1)/2)
  std::vector<std::string> names;
  int block_length = 0;
  int block_hop = 0;
};

inline constexpr int kTimbreFrameLength = 2048;
inline constexpr double kTimbreOverlap = 0.5;
inline constexpr int kMfccBands = 128;
inline constexpr int kMfccCoefficients = 20;
inline constexpr int kMspBands = 32;
inline constexpr int kMspBlockFrames = 10;
inline constexpr double kMspPercentile = 60.0;
inline constexpr int kMcvBlockLength = 100;
inline constexpr int kMcvBlockHop = 50;
inline constexpr double kLogFloor = 1e-10;

/// The 2048-sample, 50% overlap STFT shared by the timbre features.
dsp::Spectrogram timbre_stft(const dsp::AudioClip& clip);

/// Rows: RMS, zero-crossing rate (sign changes / (frame_length - 1)).
FrameFeatureSequence tfd_frames(const dsp::AudioClip& clip);

/// Cepstral coefficients 1..20 (0-based) of the log 128-band mel spectrum.
FrameFeatureSequence mfcc_frames(const dsp::AudioClip& clip);
FrameFeatureSequence mfcc_frames(const dsp::Spectrogram& timbre_spec);
FrameFeatureSequence mfcc_from_mel(const dsp::MelSpectrogram& mel);

/// Frame-to-frame difference. A single-frame input yields one zero frame.
FrameFeatureSequence delta(const FrameFeatureSequence& seq);

/// Width of a block summary for D per-frame dims.
constexpr int block_summary_size(int dims) { return 2 * (dims + dims * (dims + 1) / 2); }

/// Blocks start every block_hop frames while a full block fits; shorter inputs form a single
/// truncated block whose across-block variance is 0. Covariance divides by n - 1.
/// `prefix` qualifies the output names, e.g. "MFCC" -> "MFCC.block_mean.cov_3_7".
BlockSummary block_mcv_summary(const FrameFeatureSequence& seq, int block_length = kMcvBlockLength,
                               int block_hop = kMcvBlockHop, const std::string& prefix = "");

/// Linear interpolation between closest order statistics (rank = p/100 * (n - 1)).
double percentile(std::vector<double> values, double pct);

/// Mel-spectral patterns: 32 bands x 10 sorted positions, band-major.
std::vector<double> msp(const dsp::AudioClip& clip);
std::vector<double> msp_from_mel(const dsp::MelSpectrogram& mel);

/// TFD(10) | MFCC(460) | DMFCC(460) | MSP(320).
std::vector<double> timbre_vector(const dsp::AudioClip& clip);

}  // namespace adq::features
