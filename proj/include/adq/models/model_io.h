#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "adq/models/cnn.h"
#include "adq/models/logistic.h"
#include "adq/models/mlp.h"

namespace adq::models {

struct CnnModel {
  CnnParams params;
  CnnTrainOptions options;
  std::vector<double> loss_trace;
};

using AnyModel = std::variant<LinearModel, MlpModel, CnnModel>;

inline constexpr int kModelFormatVersion = 1;

/// Linear models are a JSON document. Neural models are "ADQMODEL", u32 version, u32 reserved,
/// u64 header length, a JSON header, then little-endian f64 parameters.
std::vector<std::uint8_t> serialize_model(const AnyModel& model);
AnyModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

std::string model_kind(const AnyModel& model);

}  // namespace adq::models
