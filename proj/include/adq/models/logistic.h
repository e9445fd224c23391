#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "adq/models/feature_matrix.h"

namespace adq::models {

struct LrOptions {
  double lambda = 0.0;
  int max_iters = 5000;
  /// Stop when the norm of the proximal gradient mapping drops below tol.
  double tol = 1e-6;
};

struct LinearModel {
  Eigen::VectorXd weights;  ///< over standardization.kept_names
  double intercept = 0.0;
  double lambda = 0.0;
  Standardizer standardization;
  std::vector<std::string> column_names;  ///< full input columns
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

double sigmoid(double z);

/// sign(v) * max(|v| - t, 0).
double soft_threshold(double v, double t);

/// Mean binary cross-entropy of sigmoid(z w + b) plus lambda * |w|_1.
double lr_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    double b, double lambda);

/// Proximal gradient with backtracking from w = 0, b = 0. The intercept is not penalized.
/// `warm` (same standardization) seeds the iterate. Throws DataError on single-class y.
LinearModel lr_train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const std::vector<std::string>& names, const LrOptions& opt,
                     const LinearModel* warm = nullptr);

double lr_predict(const LinearModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd lr_predict(const LinearModel& m, const Eigen::MatrixXd& x);

/// Nonzero weights by descending magnitude, ties by name.
std::vector<std::pair<std::string, double>> selected_coefficients(const LinearModel& m);

}  // namespace adq::models
