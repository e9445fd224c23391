#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "adq/eval/folds.h"
#include "adq/models/cnn.h"
#include "adq/models/feature_matrix.h"
#include "adq/models/mlp.h"

namespace adq::eval {

enum class Method { lr, l1_lr, mlp, cnn, oracle, coin_flip };

std::string method_name(Method m);
/// Accepts LR, L1-LR, MLP, CNN, oracle, coin-flip (case-insensitive).
Method parse_method(const std::string& text);

inline constexpr int kDefaultFolds = 10;
inline constexpr int kInnerFolds = 3;
inline const std::vector<double> kLambdaGrid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};

/// One row per ad. Feature methods read `features`, the CNN reads `spectrograms`.
struct EvalDataset {
  std::vector<std::string> ad_ids;
  std::vector<int> labels;
  const models::FeatureMatrix* features = nullptr;
  const std::vector<Eigen::MatrixXd>* spectrograms = nullptr;

  void validate(Method m) const;
};

struct EvalOptions {
  int k = kDefaultFolds;
  std::uint64_t seed = 0;
  std::optional<double> lambda;  ///< L1-LR: fixed lambda; otherwise chosen from kLambdaGrid
  models::MlpTrainOptions mlp;
  models::CnnConfig cnn;
  models::CnnTrainOptions cnn_train;
  int patches_per_ad = models::kPatchesPerAd;
  int patch_frames = models::kPatchFrames;
  int workers = 1;  ///< folds evaluated concurrently
};

struct FoldResult {
  int fold = 0;
  double auc = 0.0;
  int n_test = 0;
  int n_pos = 0;
  int n_neg = 0;
  double lambda = 0.0;  ///< regularization used, 0 for unpenalized methods
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct EvalReport {
  std::string method;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  double mean_auc = 0.0;
  double ci_half_width = 0.0;  ///< 1.96 * sample std / sqrt(k)

  /// Recomputes mean_auc and ci_half_width from the fold AUCs.
  void summarize();
};

/// L1-LR lambda from kLambdaGrid by inner stratified CV on the training rows, warm-started from
/// the largest lambda down. Ties go to the larger lambda.
double select_lambda(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                     const std::vector<std::string>& names, std::uint64_t seed);

EvalReport cross_validate(Method method, const EvalDataset& data, const FoldPlan& plan,
                          const EvalOptions& opt);

/// Convenience: builds the stratified plan from opt.k and opt.seed.
EvalReport cross_validate(Method method, const EvalDataset& data, const EvalOptions& opt);

}  // namespace adq::eval
