#include "adq/models/feature_matrix.h"

#include <cmath>
#include <set>

#include "adq/error.h"

namespace adq::models {

void FeatureMatrix::validate() const {
  if (static_cast<Eigen::Index>(column_names.size()) != d()) {
    throw DataError("feature matrix has " + std::to_string(d()) + " columns but " +
                    std::to_string(column_names.size()) + " names");
  }
  if (static_cast<Eigen::Index>(ad_ids.size()) != n()) {
    throw DataError("feature matrix has " + std::to_string(n()) + " rows but " +
                    std::to_string(ad_ids.size()) + " ad ids");
  }
  if (!rows.allFinite()) throw DataError("feature matrix contains non-finite values");
  std::set<std::string> seen;
  for (const auto& name : column_names) {
    if (!seen.insert(name).second) throw DataError("duplicate column name '" + name + "'");
  }
}

FeatureMatrix FeatureMatrix::subset(const std::vector<std::size_t>& index) const {
  FeatureMatrix out;
  out.column_names = column_names;
  out.rows.resize(static_cast<Eigen::Index>(index.size()), d());
  for (std::size_t i = 0; i < index.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(index[i]));
    out.ad_ids.push_back(ad_ids[index[i]]);
  }
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
  if (x.rows() < 1) throw DataError("cannot standardize an empty matrix");
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) {
    throw DataError("standardize: column name count mismatch");
  }
  Standardizer s;
  s.input_width = x.cols();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows()))
          .sqrt();
  std::vector<double> m, sc;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double tol = 1e-12 * std::max(1.0, std::abs(mean(j)));
    if (sd(j) > tol) {
      s.kept.push_back(j);
      s.kept_names.push_back(names[static_cast<std::size_t>(j)]);
      m.push_back(mean(j));
      sc.push_back(sd(j));
    } else {
      s.dropped_names.push_back(names[static_cast<std::size_t>(j)]);
    }
  }
  s.mean = Eigen::Map<Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  s.scale = Eigen::Map<Eigen::VectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_width) throw DataError("standardize: input width mismatch");
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.col(jj) = (x.col(kept[j]).array() - mean(jj)) / scale(jj);
  }
  return out;
}

Eigen::VectorXd Standardizer::apply_row(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != input_width) throw DataError("standardize: input width mismatch");
  Eigen::VectorXd out(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out(jj) = (x(kept[j]) - mean(jj)) / scale(jj);
  }
  return out;
}

}  // namespace adq::models
