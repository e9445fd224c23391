#include "adq/features/timbre.h"

#include <algorithm>
#include <cmath>

#include "adq/error.h"

namespace adq::features {

dsp::Spectrogram timbre_stft(const dsp::AudioClip& clip) {
  return dsp::stft(clip, kTimbreFrameLength, kTimbreOverlap);
}

FrameFeatureSequence tfd_frames(const dsp::AudioClip& clip) {
  clip.validate();
  const int hop = dsp::hop_for(kTimbreFrameLength, kTimbreOverlap);
  const Eigen::Index frames = dsp::stft_frame_count(clip.samples.size(), kTimbreFrameLength, hop);
  FrameFeatureSequence seq;
  seq.feature_names = {"rms", "zcr"};
  seq.values.resize(2, frames);
  const std::size_t n = clip.samples.size();
  for (Eigen::Index f = 0; f < frames; ++f) {
    const std::size_t start = static_cast<std::size_t>(f) * static_cast<std::size_t>(hop);
    double energy = 0.0;
    int crossings = 0;
    bool prev_negative = false;
    for (int i = 0; i < kTimbreFrameLength; ++i) {
      const std::size_t at = start + static_cast<std::size_t>(i);
      const double x = at < n ? clip.samples[at] : 0.0;
      energy += x * x;
      const bool negative = x < 0.0;
      if (i > 0 && negative != prev_negative) ++crossings;
      prev_negative = negative;
    }
    seq.values(0, f) = std::sqrt(energy / kTimbreFrameLength);
    seq.values(1, f) = static_cast<double>(crossings) / (kTimbreFrameLength - 1);
  }
  return seq;
}

FrameFeatureSequence mfcc_frames(const dsp::Spectrogram& timbre_spec) {
  return mfcc_from_mel(dsp::mel_spectrogram(timbre_spec, kMfccBands));
}

FrameFeatureSequence mfcc_from_mel(const dsp::MelSpectrogram& mel) {
  if (mel.band_count != kMfccBands || mel.bands.rows() != kMfccBands) {
    throw ParameterError("mfcc: expected a 128-band mel spectrogram");
  }
  FrameFeatureSequence seq;
  for (int c = 1; c <= kMfccCoefficients; ++c) seq.feature_names.push_back(std::to_string(c));
  seq.values.resize(kMfccCoefficients, mel.frames());
  std::vector<double> logmel(kMfccBands);
  for (Eigen::Index f = 0; f < mel.frames(); ++f) {
    for (int m = 0; m < kMfccBands; ++m) {
      logmel[static_cast<std::size_t>(m)] = std::log(std::max(mel.bands(m, f), kLogFloor));
    }
    const auto cep = dsp::dct2(logmel, kMfccCoefficients + 1);
    for (int c = 0; c < kMfccCoefficients; ++c) {
      seq.values(c, f) = cep[static_cast<std::size_t>(c) + 1];
    }
  }
  return seq;
}

FrameFeatureSequence mfcc_frames(const dsp::AudioClip& clip) {
  return mfcc_frames(timbre_stft(clip));
}

FrameFeatureSequence delta(const FrameFeatureSequence& seq) {
  FrameFeatureSequence out;
  out.feature_names = seq.feature_names;
  if (seq.frames() < 2) {
    out.values = Eigen::MatrixXd::Zero(seq.dims(), 1);
    return out;
  }
  const Eigen::Index n = seq.frames() - 1;
  out.values = seq.values.rightCols(n) - seq.values.leftCols(n);
  return out;
}

BlockSummary block_mcv_summary(const FrameFeatureSequence& seq, int block_length, int block_hop,
                               const std::string& prefix) {
  if (block_length < 2 || block_hop < 1) {
    throw ParameterError("block_mcv_summary: block_length >= 2 and block_hop >= 1 required");
  }
  if (seq.frames() < 1) throw ParameterError("block_mcv_summary: empty sequence");
  const Eigen::Index d = seq.dims();
  const Eigen::Index width = d + d * (d + 1) / 2;

  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // (start, length)
  if (seq.frames() < block_length) {
    blocks.emplace_back(0, seq.frames());
  } else {
    for (Eigen::Index s = 0; s + block_length <= seq.frames(); s += block_hop) {
      blocks.emplace_back(s, block_length);
    }
  }

  Eigen::MatrixXd mcv(width, static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto [start, len] = blocks[b];
    const Eigen::MatrixXd block = seq.values.middleCols(start, len);
    const Eigen::VectorXd mean = block.rowwise().mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    if (len > 1) {
      const Eigen::MatrixXd centered = block.colwise() - mean;
      cov = centered * centered.transpose() / static_cast<double>(len - 1);
    }
    auto col = mcv.col(static_cast<Eigen::Index>(b));
    col.head(d) = mean;
    Eigen::Index at = d;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) col(at++) = cov(i, j);
    }
  }

  const Eigen::VectorXd across_mean = mcv.rowwise().mean();
  const Eigen::VectorXd across_var =
      (mcv.colwise() - across_mean).array().square().rowwise().mean();

  BlockSummary out;
  out.block_length = block_length;
  out.block_hop = block_hop;
  out.values.resize(static_cast<std::size_t>(2 * width));
  for (Eigen::Index i = 0; i < width; ++i) {
    out.values[static_cast<std::size_t>(i)] = across_mean(i);
    out.values[static_cast<std::size_t>(width + i)] = across_var(i);
  }

  std::vector<std::string> inner;
  for (Eigen::Index i = 0; i < d; ++i) inner.push_back("mean_" + seq.feature_names[static_cast<std::size_t>(i)]);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      inner.push_back("cov_" + seq.feature_names[static_cast<std::size_t>(i)] + "_" +
                      seq.feature_names[static_cast<std::size_t>(j)]);
    }
  }
  const std::string head = prefix.empty() ? "" : prefix + ".";
  for (const auto& n : inner) out.names.push_back(head + "block_mean." + n);
  for (const auto& n : inner) out.names.push_back(head + "block_var." + n);
  return out;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ParameterError("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> msp_from_mel(const dsp::MelSpectrogram& mel) {
  const Eigen::Index bands = mel.bands.rows();
  const Eigen::Index block_count = std::max<Eigen::Index>(1, mel.frames() / kMspBlockFrames);
  // sorted[band][position] holds one value per block.
  std::vector<std::vector<double>> sorted(static_cast<std::size_t>(bands * kMspBlockFrames));
  std::vector<double> activ(kMspBlockFrames);
  for (Eigen::Index b = 0; b < block_count; ++b) {
    for (Eigen::Index m = 0; m < bands; ++m) {
      for (int i = 0; i < kMspBlockFrames; ++i) {
        const Eigen::Index f = b * kMspBlockFrames + i;
        activ[static_cast<std::size_t>(i)] = f < mel.frames() ? mel.bands(m, f) : 0.0;
      }
      std::sort(activ.begin(), activ.end());
      for (int i = 0; i < kMspBlockFrames; ++i) {
        sorted[static_cast<std::size_t>(m * kMspBlockFrames + i)].push_back(
            activ[static_cast<std::size_t>(i)]);
      }
    }
  }
  std::vector<double> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) out[i] = percentile(sorted[i], kMspPercentile);
  return out;
}

std::vector<double> msp(const dsp::AudioClip& clip) {
  return msp_from_mel(dsp::mel_spectrogram(timbre_stft(clip), kMspBands));
}

std::vector<double> timbre_vector(const dsp::AudioClip& clip) {
  const dsp::Spectrogram spec = timbre_stft(clip);
  const FrameFeatureSequence mfcc = mfcc_frames(spec);
  std::vector<double> out;
  out.reserve(1250);
  auto append = [&out](const std::vector<double>& v) { out.insert(out.end(), v.begin(), v.end()); };
  append(block_mcv_summary(tfd_frames(clip)).values);
  append(block_mcv_summary(mfcc).values);
  append(block_mcv_summary(delta(mfcc)).values);
  append(msp_from_mel(dsp::mel_spectrogram(spec, kMspBands)));
  return out;
}

}  // namespace adq::features
