#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace adq::models {

/// n ads x d features.
struct FeatureMatrix {
  Eigen::MatrixXd rows;
  std::vector<std::string> column_names;
  std::vector<std::string> ad_ids;

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index d() const { return rows.cols(); }
  /// Throws DataError on shape mismatch, non-finite values or duplicate names.
  void validate() const;
  /// Rows at the given indices, in order.
  FeatureMatrix subset(const std::vector<std::size_t>& index) const;
};

/// Column-wise z-score fitted on training data. Zero-variance columns are dropped.
struct Standardizer {
  std::vector<Eigen::Index> kept;  ///< indices into the input columns
  Eigen::VectorXd mean;            ///< per kept column
  Eigen::VectorXd scale;           ///< population std per kept column, > 0
  std::vector<std::string> kept_names;
  std::vector<std::string> dropped_names;
  Eigen::Index input_width = 0;

  static Standardizer fit(const Eigen::MatrixXd& x, const std::vector<std::string>& names);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply_row(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

}  // namespace adq::models
