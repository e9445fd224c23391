#include "adq/features/harmony.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "adq/error.h"

namespace adq::features {

namespace {

constexpr std::array<double, kPitchClasses> kMajorKey = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                         2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr std::array<double, kPitchClasses> kMinorKey = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                         2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

TemplateBank make_bank() {
  TemplateBank bank;
  bank.chords.setZero();
  for (int root = 0; root < kPitchClasses; ++root) {
    for (int minor = 0; minor < 2; ++minor) {
      const int row = root + minor * kPitchClasses;
      const int third = minor ? 3 : 4;
      for (int step : {0, third, 7}) bank.chords(row, (root + step) % kPitchClasses) = 1.0;
      const auto& key = minor ? kMinorKey : kMajorKey;
      for (int i = 0; i < kPitchClasses; ++i) {
        bank.keys(row, (root + i) % kPitchClasses) = key[static_cast<std::size_t>(i)];
      }
    }
  }
  bank.chords.rowwise().normalize();
  bank.keys.rowwise().normalize();
  return bank;
}

}  // namespace

const TemplateBank& TemplateBank::standard() {
  static const TemplateBank bank = make_bank();
  return bank;
}

std::string pitch_class_name(int pc) {
  static const char* names[] = {"A", "A#", "B", "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#"};
  return names[((pc % kPitchClasses) + kPitchClasses) % kPitchClasses];
}

std::string template_name(int index) {
  return pitch_class_name(index % kPitchClasses) + (index < kPitchClasses ? ":maj" : ":min");
}

dsp::CqtParams harmony_cqt_params() {
  dsp::CqtParams p;
  p.bins = kHarmonyOctaves * kPitchClasses;
  p.bins_per_octave = kPitchClasses;
  p.f_min = dsp::kCqtFmin;
  p.hop = kHarmonyHop;
  p.window_scale = kHarmonyWindowScale;
  return p;
}

Eigen::MatrixXd hpcp_from_cqt(const dsp::Spectrogram& cqt) {
  if (cqt.bins() % kPitchClasses != 0) {
    throw ParameterError("hpcp: CQT must span whole octaves of 12 bins");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(kPitchClasses, cqt.frames());
  for (Eigen::Index n = 0; n < cqt.bins(); ++n) {
    out.row((n + kCqtBinZeroClass) % kPitchClasses) += cqt.magnitudes.row(n);
  }
  return out;
}

Eigen::MatrixXd hpcp(const dsp::AudioClip& clip) {
  return hpcp_from_cqt(dsp::cqt(clip, harmony_cqt_params()));
}

std::array<double, kShiftInvariantBins> shift_invariant_12(
    const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != kPitchClasses) throw ParameterError("shift_invariant_12: need 12 values");
  std::array<double, kPitchClasses> acf{};
  for (int k = 0; k < kPitchClasses; ++k) {
    for (int i = 0; i < kPitchClasses; ++i) acf[k] += x(i) * x((i + k) % kPitchClasses);
  }
  std::array<double, kShiftInvariantBins> out{};
  for (int b = 0; b < kShiftInvariantBins; ++b) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < kPitchClasses; ++i) {
      acc += acf[static_cast<std::size_t>(i)] *
             std::polar(1.0, -2.0 * std::numbers::pi * b * i / kShiftInvariantPoints);
    }
    out[static_cast<std::size_t>(b)] = std::abs(acc);
  }
  return out;
}

std::array<double, kShiftInvariantBins> sihpcp(const Eigen::MatrixXd& frames) {
  if (frames.rows() != kPitchClasses || frames.cols() < 1) {
    throw ParameterError("sihpcp: need a 12 x N HPCP with N >= 1");
  }
  Eigen::VectorXd mean = frames.rowwise().mean();
  const double mass = mean.sum();
  if (mass > 0.0) mean /= mass;
  return shift_invariant_12(mean);
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double na = da.norm();
  const double nb = db.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return std::clamp(da.dot(db) / (na * nb), -1.0, 1.0);
}

Eigen::MatrixXd chordogram(const Eigen::MatrixXd& frames, const TemplateBank& bank) {
  if (frames.rows() != kPitchClasses) throw ParameterError("chordogram: need 12 x N HPCP");
  Eigen::MatrixXd out(kTemplateCount, frames.cols());
  for (Eigen::Index n = 0; n < frames.cols(); ++n) {
    for (int t = 0; t < kTemplateCount; ++t) {
      out(t, n) = pearson(frames.col(n), bank.chords.row(t).transpose());
    }
  }
  return out;
}

ChordFeatures chord_features(const Eigen::MatrixXd& cg) {
  if (cg.rows() != kTemplateCount || cg.cols() < 1) {
    throw ParameterError("chord_features: need a 24 x N chordogram with N >= 1");
  }
  ChordFeatures f;
  f.chc = cg.rowwise().mean();
  f.ch = Eigen::VectorXd::Zero(kTemplateCount);
  int voiced = 0;
  for (Eigen::Index n = 0; n < cg.cols(); ++n) {
    if ((cg.col(n).array() == 0.0).all()) continue;
    Eigen::Index best = 0;
    cg.col(n).maxCoeff(&best);
    f.ch(best) += 1.0;
    ++voiced;
  }
  if (voiced > 0) f.ch /= voiced;
  return f;
}

Eigen::VectorXd key_correlations(const Eigen::MatrixXd& frames, const TemplateBank& bank) {
  if (frames.rows() != kPitchClasses || frames.cols() < 1) {
    throw ParameterError("key_correlations: need a 12 x N HPCP with N >= 1");
  }
  const Eigen::VectorXd mean = frames.rowwise().mean();
  Eigen::VectorXd kc(kTemplateCount);
  for (int t = 0; t < kTemplateCount; ++t) kc(t) = pearson(mean, bank.keys.row(t).transpose());
  return kc;
}

int mode_estimate(const Eigen::Ref<const Eigen::VectorXd>& kc) {
  if (kc.size() != kTemplateCount) throw ParameterError("mode_estimate: need 24 values");
  return kc.head(kPitchClasses).maxCoeff() >= kc.tail(kPitchClasses).maxCoeff() ? 1 : 0;
}

std::array<double, 2 * kShiftInvariantBins> shift_invariant_24(
    const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != kTemplateCount) throw ParameterError("shift_invariant_24: need 24 values");
  const Eigen::VectorXd maj = x.head(kPitchClasses);
  const Eigen::VectorXd min = x.tail(kPitchClasses);
  const auto sum = shift_invariant_12(maj + min);
  const auto diff = shift_invariant_12(maj - min);
  std::array<double, 2 * kShiftInvariantBins> out{};
  std::copy(sum.begin(), sum.end(), out.begin());
  std::copy(diff.begin(), diff.end(), out.begin() + kShiftInvariantBins);
  return out;
}

std::vector<double> harmony_vector(const dsp::AudioClip& clip) {
  const Eigen::MatrixXd frames = hpcp(clip);
  const auto si = sihpcp(frames);
  const ChordFeatures cf = chord_features(chordogram(frames));
  const Eigen::VectorXd kc = key_correlations(frames);

  std::vector<double> out(si.begin(), si.end());
  out.push_back(mode_estimate(kc));
  for (const Eigen::VectorXd* v : {&cf.ch, &cf.chc, &kc}) {
    const auto s = shift_invariant_24(*v);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace adq::features
