#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "adq/models/adam.h"
#include "adq/models/feature_matrix.h"
#include "adq/models/random.h"

namespace adq::models {

/// Fully connected ReLU network with one sigmoid output.
struct MlpParams {
  std::vector<int> sizes;                ///< [d_in, h1, ..., 1]
  std::vector<Eigen::MatrixXd> weights;  ///< layer l: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;
  double dropout = 0.4;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// One matrix per hidden layer (h x batch); entries 0 or 1 / (1 - rate).
using DropoutMasks = std::vector<Eigen::MatrixXd>;

inline constexpr int kMlpHidden1 = 150;
inline constexpr int kMlpHidden2 = 75;
inline constexpr double kMlpDropout = 0.4;

/// He-uniform hidden layers, Glorot-uniform output layer, zero biases.
MlpParams mlp_init(const std::vector<int>& sizes, std::uint64_t seed, double dropout = kMlpDropout);

DropoutMasks sample_masks(const MlpParams& p, Eigen::Index batch, Rng& rng);

/// Probabilities for the columns of x (d x batch). Without masks this is inference mode.
Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::MatrixXd& x,
                            const DropoutMasks* masks = nullptr);

/// Mean binary cross-entropy over the columns of x; fills grads when given.
double mlp_loss(const MlpParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                const DropoutMasks* masks, MlpGrads* grads);

struct MlpTrainOptions {
  int batch_size = 50;
  int epochs = 200;
  std::uint64_t seed = 0;
  AdamOptions adam;
};

/// Rows of x are samples. Returns the per-epoch mean training loss.
std::vector<double> mlp_train(MlpParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const MlpTrainOptions& opt);

/// Standardized inputs feeding an MLP.
struct MlpModel {
  Standardizer standardization;
  MlpParams params;
  MlpTrainOptions options;
  std::vector<std::string> column_names;
  std::vector<double> loss_trace;
};

MlpModel mlp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const std::vector<std::string>& names, const MlpTrainOptions& opt,
                 std::vector<int> hidden = {kMlpHidden1, kMlpHidden2}, double dropout = kMlpDropout);

Eigen::VectorXd mlp_predict(const MlpModel& m, const Eigen::MatrixXd& x);

}  // namespace adq::models
