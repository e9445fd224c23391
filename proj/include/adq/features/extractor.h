#pragma once

#include <string>
#include <vector>

#include "adq/dsp/audio.h"

namespace adq::features {

struct FeatureBlock {
  std::string name;
  int dims = 0;
};

/// Ordered block table of the full feature vector.
const std::vector<FeatureBlock>& feature_blocks();

int feature_total();

/// Input width quoted for the original MLP, which disagrees with the block total.
inline constexpr int kReferenceMlpInputWidth = 2440;

inline constexpr const char* kFeatureLedgerVersion = "adq-features-1";

/// Block-qualified column names, e.g. "MFCC.block_mean.cov_3_7"; size feature_total().
const std::vector<std::string>& feature_names();

struct FeatureVector {
  std::string ad_id;
  std::vector<double> values;
};

/// Resamples to the analysis rate if needed and concatenates timbre, rhythm and harmony blocks.
FeatureVector extract_features(const dsp::AudioClip& clip);

/// Human-readable block table with totals and the width discrepancy note.
std::string feature_ledger_text(std::size_t rows);

}  // namespace adq::features
