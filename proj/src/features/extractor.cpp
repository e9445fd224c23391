#include "adq/features/extractor.h"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "adq/error.h"
#include "adq/features/harmony.h"
#include "adq/features/rhythm.h"
#include "adq/features/timbre.h"

namespace adq::features {

namespace {

std::vector<std::string> build_names() {
  std::vector<std::string> names;
  auto summary_names = [&](const std::string& prefix, std::vector<std::string> dims) {
    FrameFeatureSequence seq;
    seq.feature_names = std::move(dims);
    seq.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(seq.feature_names.size()), 1);
    const auto s = block_mcv_summary(seq, kMcvBlockLength, kMcvBlockHop, prefix);
    names.insert(names.end(), s.names.begin(), s.names.end());
  };
  std::vector<std::string> cep;
  for (int c = 1; c <= kMfccCoefficients; ++c) cep.push_back(std::to_string(c));
  summary_names("TFD", {"rms", "zcr"});
  summary_names("MFCC", cep);
  summary_names("DMFCC", cep);
  for (int m = 0; m < kMspBands; ++m) {
    for (int i = 0; i < kMspBlockFrames; ++i) {
      names.push_back("MSP.band_" + std::to_string(m) + ".pos_" + std::to_string(i));
    }
  }

  names.push_back("TEMPO.primary");
  names.push_back("TEMPO.secondary");
  for (int b = 0; b < kTempogramSize; ++b) names.push_back("TG_LIN.bpm_" + std::to_string(b));
  const char* ratio_names[] = {"4",   "8/3", "3",   "2",   "4/3", "3/2", "1",
                               "2/3", "3/4", "1/2", "1/3", "3/8", "1/4"};
  for (const char* band : {"B", "T", "H"}) {
    for (const char* r : ratio_names) names.push_back(std::string("TGR_") + band + ".x" + r);
  }
  for (const char* band : {"B", "T", "H"}) {
    for (int i = 0; i < kBeatProfileBins; ++i) {
      names.push_back(std::string("BPDIST_") + band + ".bin_" + std::to_string(i));
    }
  }
  for (int c = 0; c < kMellinSize; ++c) names.push_back("MELLIN.scale_" + std::to_string(c));

  for (int b = 0; b < kShiftInvariantBins; ++b) names.push_back("SIHPCP.bin_" + std::to_string(b));
  names.push_back("MODE.major");
  for (const char* block : {"SICH", "SICHC", "SIKC"}) {
    for (const char* part : {"sum", "diff"}) {
      for (int b = 0; b < kShiftInvariantBins; ++b) {
        names.push_back(std::string(block) + "." + part + "_" + std::to_string(b));
      }
    }
  }
  return names;
}

}  // namespace

const std::vector<FeatureBlock>& feature_blocks() {
  static const std::vector<FeatureBlock> blocks = {
      {"TFD", block_summary_size(2)},
      {"MFCC", block_summary_size(kMfccCoefficients)},
      {"DMFCC", block_summary_size(kMfccCoefficients)},
      {"MSP", kMspBands * kMspBlockFrames},
      {"TEMPO", 2},
      {"TG_LIN", kTempogramSize},
      {"TGR", 3 * kTempogramRatioCount},
      {"BPDIST", 3 * kBeatProfileBins},
      {"MELLIN", kMellinSize},
      {"SIHPCP", kShiftInvariantBins},
      {"MODE", 1},
      {"SICH/SICHC/SIKC", 3 * 2 * kShiftInvariantBins},
  };
  return blocks;
}

int feature_total() {
  const auto& b = feature_blocks();
  return std::accumulate(b.begin(), b.end(), 0,
                         [](int acc, const FeatureBlock& x) { return acc + x.dims; });
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = build_names();
  return names;
}

FeatureVector extract_features(const dsp::AudioClip& clip) {
  const dsp::AudioClip prepared = dsp::prepare_for_analysis(clip);
  FeatureVector fv;
  fv.ad_id = clip.id;
  fv.values = timbre_vector(prepared);
  const auto rhythm = rhythm_vector(prepared);
  const auto harmony = harmony_vector(prepared);
  fv.values.insert(fv.values.end(), rhythm.begin(), rhythm.end());
  fv.values.insert(fv.values.end(), harmony.begin(), harmony.end());
  if (static_cast<int>(fv.values.size()) != feature_total()) {
    throw Error("feature vector width " + std::to_string(fv.values.size()) +
                " does not match ledger total " + std::to_string(feature_total()));
  }
  return fv;
}

std::string feature_ledger_text(std::size_t rows) {
  std::ostringstream out;
  char line[96];
  std::snprintf(line, sizeof line, "%-18s %6s\n", "block", "dims");
  out << line;
  for (const auto& b : feature_blocks()) {
    std::snprintf(line, sizeof line, "%-18s %6d\n", b.name.c_str(), b.dims);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-18s %6d\n", "total", feature_total());
  out << line;
  out << "rows: " << rows << "\n";
  out << "note: the block total is " << feature_total() << " while the reference MLP input width is "
      << kReferenceMlpInputWidth << " (difference " << feature_total() - kReferenceMlpInputWidth
      << "); all " << feature_total() << " columns are emitted.\n";
  return out.str();
}

}  // namespace adq::features
