#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "adq/dsp/audio.h"
#include "adq/dsp/cqt.h"
#include "adq/models/adam.h"
#include "adq/models/random.h"

namespace adq::models {

struct CnnConfig {
  std::string profile = "desk";
  int input_channels = 100;
  std::vector<int> filters = {32, 32, 64, 64};
  std::vector<int> lengths = {4, 4, 4, 3};
  std::vector<int> pools = {8, 2, 2, 1};
  std::vector<int> dense = {128, 128};
  double dropout = 0.5;

  static CnnConfig desk(int channels = 100);
  static CnnConfig paper(int channels = 100);
  /// Tiny network for gradient checks.
  static CnnConfig micro(int channels = 5);
  static CnnConfig by_name(const std::string& profile, int channels = 100);

  /// Shortest input that leaves one frame after the last stage.
  int min_input_length() const;
  void validate() const;
};

struct CnnParams {
  CnnConfig config;
  std::vector<Eigen::MatrixXd> conv_w;  ///< filters x (length * in_channels), time-major
  std::vector<Eigen::VectorXd> conv_b;
  std::vector<Eigen::MatrixXd> dense_w;  ///< hidden layers then the 2-way output
  std::vector<Eigen::VectorXd> dense_b;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const;
};

struct CnnGrads {
  std::vector<Eigen::MatrixXd> conv_w;
  std::vector<Eigen::VectorXd> conv_b;
  std::vector<Eigen::MatrixXd> dense_w;
  std::vector<Eigen::VectorXd> dense_b;

  static CnnGrads zeros_like(const CnnParams& p);
  void add(const CnnGrads& other);
  void scale(double s);
};

/// Per hidden dense layer; entries 0 or 1 / (1 - rate).
using CnnMasks = std::vector<Eigen::VectorXd>;

CnnParams cnn_init(const CnnConfig& config, std::uint64_t seed);

CnnMasks sample_cnn_masks(const CnnParams& p, Rng& rng);

/// [mean; max; l2; std] per channel of a C x T activation, std with eps inside the root.
Eigen::VectorXd global_pool(const Eigen::MatrixXd& a);
inline constexpr double kPoolStdEps = 1e-8;

/// Class probabilities [bad, good] for an F x N spectrogram. Short inputs are zero padded.
Eigen::Vector2d cnn_forward(const CnnParams& p, const Eigen::MatrixXd& spec,
                            const CnnMasks* masks = nullptr);

/// Cross-entropy of one example; adds its gradient into grads when given.
double cnn_loss(const CnnParams& p, const Eigen::MatrixXd& spec, int label, const CnnMasks* masks,
                CnnGrads* grads);

struct CnnTrainOptions {
  int minibatch = 64;
  int epochs = 14;
  std::uint64_t seed = 0;
  AdamOptions adam;
  int threads = 1;
};

/// Returns the per-epoch mean training loss.
std::vector<double> cnn_train(CnnParams& p, const std::vector<Eigen::MatrixXd>& patches,
                              const std::vector<int>& labels, const CnnTrainOptions& opt);

/// Good-class probability from one pass over the full spectrogram.
double cnn_predict_ad(const CnnParams& p, const Eigen::MatrixXd& spec);

inline constexpr int kCnnCqtBins = 100;
inline constexpr int kCnnCqtHop = 1024;
inline constexpr double kLogCqtPower = 1.0;
inline constexpr double kLogCqtScale = 100.0;
inline constexpr int kPatchSeconds = 10;
/// Frames covering 10 s at hop 1024 and 44100 Hz.
inline constexpr int kPatchFrames = 431;
inline constexpr int kPatchesPerAd = 3;

dsp::CqtParams cnn_cqt_params();

/// log(1 + scale * |CQT|^power) with the CNN CQT parameters, F x N.
Eigen::MatrixXd log_cqt(const dsp::AudioClip& clip);

struct SpectrogramPatch {
  Eigen::MatrixXd values;
  std::string ad_id;
  Eigen::Index offset = 0;
};

/// Uniform random offsets; inputs shorter than a patch are zero padded on the right.
std::vector<SpectrogramPatch> cqt_patch_sample(const Eigen::MatrixXd& spec, int count,
                                               std::uint64_t seed, const std::string& ad_id = {},
                                               int patch_frames = kPatchFrames);

}  // namespace adq::models
