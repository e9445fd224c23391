#include "adq/models/mlp.h"

#include <cmath>

#include "adq/error.h"
#include "adq/models/logistic.h"

namespace adq::models {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_binary(const Eigen::VectorXd& y, bool need_both) {
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1.0) {
      pos = true;
    } else if (y(i) == 0.0) {
      neg = true;
    } else {
      throw DataError("labels must be 0 or 1");
    }
  }
  if (need_both && (!pos || !neg)) throw DataError("training labels contain a single class");
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

MlpParams mlp_init(const std::vector<int>& sizes, std::uint64_t seed, double dropout) {
  if (sizes.size() < 2 || sizes.back() != 1) throw ParameterError("mlp sizes must end in 1");
  for (int s : sizes) {
    if (s < 1) throw ParameterError("mlp layer sizes must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout must be in [0, 1)");
  MlpParams p;
  p.sizes = sizes;
  p.dropout = dropout;
  p.seed = seed;
  Rng rng = make_rng(seed, 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const bool last = l + 2 == sizes.size();
    const double limit = last ? std::sqrt(6.0 / (in + out)) : std::sqrt(6.0 / in);
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = uniform(rng, -limit, limit);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return p;
}

DropoutMasks sample_masks(const MlpParams& p, Eigen::Index batch, Rng& rng) {
  DropoutMasks masks;
  const double keep = 1.0 / (1.0 - p.dropout);
  for (std::size_t l = 1; l + 1 < p.sizes.size(); ++l) {
    Eigen::MatrixXd m(p.sizes[l], batch);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      m.data()[k] = uniform01(rng) < p.dropout ? 0.0 : keep;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

namespace {

// Activations after ReLU and dropout; acts[0] is the input.
Eigen::VectorXd forward_cached(const MlpParams& p, const Eigen::MatrixXd& x, const DropoutMasks* masks,
                               std::vector<Eigen::MatrixXd>& acts, Eigen::VectorXd& logits) {
  if (x.rows() != p.sizes.front()) throw DataError("mlp input width mismatch");
  acts.assign(1, x);
  const std::size_t layers = p.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Eigen::MatrixXd h = (p.weights[l] * acts.back()).colwise() + p.biases[l];
    h = h.cwiseMax(0.0);
    if (masks != nullptr) h.array() *= (*masks)[l].array();
    acts.push_back(std::move(h));
  }
  logits = ((p.weights.back() * acts.back()).colwise() + p.biases.back()).row(0).transpose();
  return logits.unaryExpr([](double z) { return sigmoid(z); });
}

}  // namespace

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::MatrixXd& x, const DropoutMasks* masks) {
  std::vector<Eigen::MatrixXd> acts;
  Eigen::VectorXd logits;
  return forward_cached(p, x, masks, acts, logits);
}

double mlp_loss(const MlpParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                const DropoutMasks* masks, MlpGrads* grads) {
  if (y.size() != x.cols()) throw DataError("mlp_loss: label count mismatch");
  std::vector<Eigen::MatrixXd> acts;
  Eigen::VectorXd logits;
  const Eigen::VectorXd prob = forward_cached(p, x, masks, acts, logits);
  const auto batch = static_cast<double>(x.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) loss += softplus(logits(i)) - y(i) * logits(i);
  loss /= batch;
  if (grads == nullptr) return loss;

  const std::size_t layers = p.weights.size();
  grads->weights.resize(layers);
  grads->biases.resize(layers);
  Eigen::MatrixXd delta = ((prob - y) / batch).transpose();  // 1 x batch
  for (std::size_t l = layers; l-- > 0;) {
    grads->weights[l] = delta * acts[l].transpose();
    grads->biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = p.weights[l].transpose() * delta;
    // acts[l] is post-ReLU and post-mask; zero entries pass no gradient.
    back.array() *= (acts[l].array() > 0.0).cast<double>();
    if (masks != nullptr) back.array() *= (*masks)[l - 1].array();
    delta = std::move(back);
  }
  return loss;
}

std::vector<double> mlp_train(MlpParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const MlpTrainOptions& opt) {
  if (x.rows() != y.size()) throw DataError("mlp_train: row count mismatch");
  if (opt.batch_size < 1 || opt.epochs < 0) throw ParameterError("mlp_train: bad batch/epochs");
  check_binary(y, true);
  const Eigen::MatrixXd xt = x.transpose();
  const auto n = static_cast<std::size_t>(x.rows());
  Rng rng = make_rng(opt.seed, 2);
  Adam adam(opt.adam);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> trace;
  MlpGrads g;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle(order, rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(opt.batch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd xb(xt.rows(), b);
      Eigen::VectorXd yb(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        xb.col(i) = xt.col(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
        yb(i) = y(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
      }
      const DropoutMasks masks = sample_masks(p, b, rng);
      total += mlp_loss(p, xb, yb, &masks, &g) * static_cast<double>(b);
      adam.next();
      for (std::size_t l = 0; l < p.weights.size(); ++l) {
        adam.update(2 * l, p.weights[l], g.weights[l]);
        adam.update(2 * l + 1, p.biases[l], g.biases[l]);
      }
    }
    trace.push_back(total / static_cast<double>(n));
  }
  return trace;
}

MlpModel mlp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const std::vector<std::string>& names, const MlpTrainOptions& opt,
                 std::vector<int> hidden, double dropout) {
  check_binary(y, true);
  MlpModel m;
  m.options = opt;
  m.column_names = names;
  m.standardization = Standardizer::fit(x, names);
  const Eigen::MatrixXd z = m.standardization.apply(x);
  std::vector<int> sizes = {static_cast<int>(z.cols())};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  m.params = mlp_init(sizes, opt.seed, dropout);
  m.loss_trace = mlp_train(m.params, z, y, opt);
  return m;
}

Eigen::VectorXd mlp_predict(const MlpModel& m, const Eigen::MatrixXd& x) {
  return mlp_forward(m.params, m.standardization.apply(x).transpose());
}

}  // namespace adq::models
