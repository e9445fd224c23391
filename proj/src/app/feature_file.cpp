#include "adq/app/feature_file.h"

#include <fstream>
#include <json.hpp>

#include "adq/engagement/csv.h"
#include "adq/error.h"

namespace adq::app {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  return csv_path.string() + ".json";
}

void write_feature_file(const std::filesystem::path& csv_path,
                        const std::vector<features::FeatureVector>& rows,
                        const std::vector<ExtractFailure>& failures) {
  const auto& names = features::feature_names();
  {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + csv_path.string());
    std::vector<std::string> header = {"ad_id"};
    header.insert(header.end(), names.begin(), names.end());
    csv::write_row(out, header);
    std::vector<std::string> fields;
    for (const auto& r : rows) {
      if (r.values.size() != names.size()) throw DataError("feature row '" + r.ad_id + "' has the wrong width");
      fields.assign(1, r.ad_id);
      for (double v : r.values) fields.push_back(csv::format_double(v));
      csv::write_row(out, fields);
    }
    if (!out) throw DataError("write failed for " + csv_path.string());
  }
  nlohmann::json side;
  side["format"] = "adq-features";
  side["feature_ledger_version"] = features::kFeatureLedgerVersion;
  side["rows"] = rows.size();
  side["columns"] = names.size();
  side["reference_mlp_input_width"] = features::kReferenceMlpInputWidth;
  for (const auto& b : features::feature_blocks()) side["blocks"].push_back({{"name", b.name}, {"dims", b.dims}});
  side["failures"] = nlohmann::json::array();
  for (const auto& f : failures) side["failures"].push_back({{"file", f.file}, {"error", f.error}});
  std::ofstream out(sidecar_path(csv_path), std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + sidecar_path(csv_path).string());
  out << side.dump(2) << "\n";
}

models::FeatureMatrix read_feature_file(const std::filesystem::path& csv_path) {
  const auto side_path = sidecar_path(csv_path);
  if (std::filesystem::exists(side_path)) {
    std::ifstream s(side_path);
    nlohmann::json side;
    try {
      side = nlohmann::json::parse(s);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(side_path.string() + ": " + e.what());
    }
    const auto version = side.value("feature_ledger_version", std::string());
    if (version != features::kFeatureLedgerVersion) {
      throw DataError(csv_path.string() + ": ledger version '" + version + "' is not " +
                      features::kFeatureLedgerVersion);
    }
  }
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + csv_path.string());
  std::string line;
  if (!csv::read_line(in, line)) throw ParseError(1, 1, "missing header");
  auto header = csv::split_line(line, 1);
  if (header.empty() || header[0] != "ad_id") throw ParseError(1, 1, "first column must be ad_id");
  models::FeatureMatrix m;
  m.column_names.assign(header.begin() + 1, header.end());
  const auto d = static_cast<Eigen::Index>(m.column_names.size());
  std::vector<double> values;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split_line(line, line_no);
    if (f.size() != header.size()) {
      throw ParseError(line_no, std::min(f.size(), header.size()) + 1, "row width differs from header");
    }
    m.ad_ids.push_back(f[0]);
    for (std::size_t c = 1; c < f.size(); ++c) values.push_back(csv::parse_double(f[c], line_no, c + 1));
  }
  const auto n = static_cast<Eigen::Index>(m.ad_ids.size());
  m.rows = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  m.validate();
  return m;
}

}  // namespace adq::app
