#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "adq/dsp/audio.h"
#include "adq/dsp/cqt.h"

namespace adq::features {

inline constexpr int kPitchClasses = 12;
inline constexpr int kTemplateCount = 24;
inline constexpr int kShiftInvariantPoints = 16;
inline constexpr int kShiftInvariantBins = kShiftInvariantPoints / 2 + 1;
inline constexpr int kHarmonyOctaves = 7;
inline constexpr int kHarmonyHop = 8192;
inline constexpr double kHarmonyWindowScale = 2.0;

/// Pitch class of CQT bin 0 (C) relative to A.
inline constexpr int kCqtBinZeroClass = 3;

/// Rows 0..11 are major roots A, A#, ..., G#; rows 12..23 the minor ones. Rows are unit L2 norm.
struct TemplateBank {
  Eigen::Matrix<double, kTemplateCount, kPitchClasses> chords;
  Eigen::Matrix<double, kTemplateCount, kPitchClasses> keys;

  static const TemplateBank& standard();
};

std::string pitch_class_name(int pc);
/// "A:maj", ..., "G#:min".
std::string template_name(int index);

dsp::CqtParams harmony_cqt_params();

/// 12 x N, class 0 = A: P[p, i] = sum_k Q[12k + p', i] with p' the bin of class p.
Eigen::MatrixXd hpcp_from_cqt(const dsp::Spectrogram& cqt);
Eigen::MatrixXd hpcp(const dsp::AudioClip& clip);

/// Rotation-invariant summary of a 12-vector: magnitudes of bins 0..8 of the 16-point
/// zero-padded DFT of its circular autocorrelation.
std::array<double, kShiftInvariantBins> shift_invariant_12(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Mean HPCP, L1 normalized, then shift_invariant_12.
std::array<double, kShiftInvariantBins> sihpcp(const Eigen::MatrixXd& frames);

/// Pearson correlation, 0 if either side has zero variance.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// 24 x N Pearson correlations of each frame with each chord template.
Eigen::MatrixXd chordogram(const Eigen::MatrixXd& frames,
                           const TemplateBank& bank = TemplateBank::standard());

struct ChordFeatures {
  Eigen::VectorXd chc;  ///< row means
  Eigen::VectorXd ch;   ///< argmax histogram over frames with any nonzero correlation
};

/// CH sums to 1 unless no frame is voiced, in which case it is all zeros.
ChordFeatures chord_features(const Eigen::MatrixXd& chordogram);

Eigen::VectorXd key_correlations(const Eigen::MatrixXd& frames,
                                 const TemplateBank& bank = TemplateBank::standard());

/// 1 (major) when the best major correlation is at least the best minor one.
int mode_estimate(const Eigen::Ref<const Eigen::VectorXd>& kc);

/// [shift_invariant_12(maj + min); shift_invariant_12(maj - min)].
std::array<double, 2 * kShiftInvariantBins> shift_invariant_24(
    const Eigen::Ref<const Eigen::VectorXd>& x);

/// SIHPCP(9) | MODE(1) | SICH(18) | SICHC(18) | SIKC(18).
std::vector<double> harmony_vector(const dsp::AudioClip& clip);

}  // namespace adq::features
