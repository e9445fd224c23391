#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adq/features/extractor.h"
#include "adq/models/feature_matrix.h"

namespace adq::app {

struct ExtractFailure {
  std::string file;
  std::string error;
};

/// Sidecar path for a feature CSV: "<path>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// CSV "ad_id,<feature names>" plus a JSON sidecar naming the ledger version, the block table
/// and any per-file failures. Rows are written in the given order.
void write_feature_file(const std::filesystem::path& csv_path,
                        const std::vector<features::FeatureVector>& rows,
                        const std::vector<ExtractFailure>& failures = {});

/// Reads a feature CSV. When the sidecar exists its ledger version must match.
models::FeatureMatrix read_feature_file(const std::filesystem::path& csv_path);

}  // namespace adq::app
