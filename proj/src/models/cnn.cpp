#include "adq/models/cnn.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "adq/dsp/spectral.h"
#include "adq/error.h"

namespace adq::models {

namespace {

using StridedMap = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;

// Column t of the view is the flattened window x[:, t .. t+len-1].
StridedMap windows(const Eigen::MatrixXd& x, int len) {
  return StridedMap(x.data(), x.rows() * len, x.cols() - len + 1, Eigen::OuterStride<>(x.rows()));
}

struct ConvCache {
  Eigen::MatrixXd input;       // C x T
  Eigen::MatrixXd activation;  // after ReLU, F x (T - L + 1)
  Eigen::MatrixXi argmax;      // pooled F x Tp, index into activation columns
  Eigen::MatrixXd pooled;      // F x Tp
};

struct ForwardCache {
  std::vector<ConvCache> conv;
  Eigen::VectorXd pooled_stats;
  std::vector<Eigen::VectorXd> hidden;  // post ReLU and mask
  Eigen::Vector2d prob;
};

Eigen::MatrixXd pad_to(const Eigen::MatrixXd& spec, int min_len) {
  if (spec.cols() >= min_len) return spec;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.rows(), min_len);
  out.leftCols(spec.cols()) = spec;
  return out;
}

void forward(const CnnParams& p, const Eigen::MatrixXd& spec, const CnnMasks* masks, ForwardCache& c) {
  const CnnConfig& cfg = p.config;
  if (spec.rows() != cfg.input_channels) {
    throw DataError("cnn input has " + std::to_string(spec.rows()) + " bins, expected " +
                    std::to_string(cfg.input_channels));
  }
  if (spec.cols() < 1) throw DataError("cnn input has no frames");
  c.conv.resize(cfg.filters.size());
  for (std::size_t i = 0; i < cfg.filters.size(); ++i) {
    ConvCache& layer = c.conv[i];
    layer.input = i == 0 ? pad_to(spec, cfg.min_input_length()) : c.conv[i - 1].pooled;
    const int len = cfg.lengths[i];
    const int pool = cfg.pools[i];
    layer.activation = (p.conv_w[i] * windows(layer.input, len)).colwise() + p.conv_b[i];
    layer.activation = layer.activation.cwiseMax(0.0);
    const Eigen::Index tp = layer.activation.cols() / pool;
    layer.pooled.resize(layer.activation.rows(), tp);
    layer.argmax.resize(layer.activation.rows(), tp);
    for (Eigen::Index t = 0; t < tp; ++t) {
      for (Eigen::Index f = 0; f < layer.activation.rows(); ++f) {
        Eigen::Index best = t * pool;
        for (Eigen::Index k = t * pool + 1; k < (t + 1) * pool; ++k) {
          if (layer.activation(f, k) > layer.activation(f, best)) best = k;
        }
        layer.pooled(f, t) = layer.activation(f, best);
        layer.argmax(f, t) = static_cast<int>(best);
      }
    }
  }
  c.pooled_stats = global_pool(c.conv.back().pooled);
  c.hidden.clear();
  const Eigen::VectorXd* in = &c.pooled_stats;
  for (std::size_t l = 0; l + 1 < p.dense_w.size(); ++l) {
    Eigen::VectorXd h = ((p.dense_w[l] * *in) + p.dense_b[l]).cwiseMax(0.0);
    if (masks != nullptr) h.array() *= (*masks)[l].array();
    c.hidden.push_back(std::move(h));
    in = &c.hidden.back();
  }
  const Eigen::VectorXd logits = p.dense_w.back() * *in + p.dense_b.back();
  const double top = logits.maxCoeff();
  const Eigen::ArrayXd e = (logits.array() - top).exp();
  c.prob = (e / e.sum()).matrix();
}

void backward(const CnnParams& p, const ForwardCache& c, int label, const CnnMasks* masks,
              CnnGrads& g) {
  const std::size_t dl = p.dense_w.size();
  Eigen::VectorXd delta = c.prob;
  delta(label) -= 1.0;
  for (std::size_t l = dl; l-- > 0;) {
    const Eigen::VectorXd& in = l == 0 ? c.pooled_stats : c.hidden[l - 1];
    g.dense_w[l].noalias() += delta * in.transpose();
    g.dense_b[l] += delta;
    Eigen::VectorXd back = p.dense_w[l].transpose() * delta;
    if (l > 0) {
      back.array() *= (c.hidden[l - 1].array() > 0.0).cast<double>();
      if (masks != nullptr) back.array() *= (*masks)[l - 1].array();
    }
    delta = std::move(back);
  }

  // Global pooling statistics back to the last pooled map.
  const Eigen::MatrixXd& a = c.conv.back().pooled;
  const Eigen::Index ch = a.rows();
  const auto t = static_cast<double>(a.cols());
  Eigen::MatrixXd da = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (Eigen::Index k = 0; k < ch; ++k) {
    const double mean = c.pooled_stats(k);
    const double l2 = c.pooled_stats(2 * ch + k);
    const double sd = c.pooled_stats(3 * ch + k);
    da.row(k).array() += delta(k) / t;
    Eigen::Index arg = 0;
    a.row(k).maxCoeff(&arg);
    da(k, arg) += delta(ch + k);
    if (l2 > 0.0) da.row(k) += delta(2 * ch + k) / l2 * a.row(k);
    da.row(k).array() += delta(3 * ch + k) * (a.row(k).array() - mean) / (t * sd);
  }

  for (std::size_t i = c.conv.size(); i-- > 0;) {
    const ConvCache& layer = c.conv[i];
    Eigen::MatrixXd dact = Eigen::MatrixXd::Zero(layer.activation.rows(), layer.activation.cols());
    for (Eigen::Index tt = 0; tt < layer.pooled.cols(); ++tt) {
      for (Eigen::Index f = 0; f < layer.pooled.rows(); ++f) {
        dact(f, layer.argmax(f, tt)) += da(f, tt);
      }
    }
    dact.array() *= (layer.activation.array() > 0.0).cast<double>();
    const int len = p.config.lengths[i];
    const auto view = windows(layer.input, len);
    g.conv_w[i].noalias() += dact * view.transpose();
    g.conv_b[i] += dact.rowwise().sum();
    if (i == 0) break;
    const Eigen::MatrixXd cols = p.conv_w[i].transpose() * dact;
    const Eigen::Index in_ch = layer.input.rows();
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(in_ch, layer.input.cols());
    for (int l = 0; l < len; ++l) dx.middleCols(l, dact.cols()) += cols.middleRows(l * in_ch, in_ch);
    da = std::move(dx);
  }
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double limit, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform(rng, -limit, limit);
  return m;
}

}  // namespace

CnnConfig CnnConfig::desk(int channels) {
  CnnConfig c;
  c.profile = "desk";
  c.input_channels = channels;
  return c;
}

CnnConfig CnnConfig::paper(int channels) {
  CnnConfig c;
  c.profile = "paper";
  c.input_channels = channels;
  c.filters = {1024, 1024, 2048, 2048};
  c.dense = {2048, 2048};
  return c;
}

CnnConfig CnnConfig::micro(int channels) {
  CnnConfig c;
  c.profile = "micro";
  c.input_channels = channels;
  c.filters = {2, 2, 2, 2};
  c.dense = {4, 4};
  return c;
}

CnnConfig CnnConfig::by_name(const std::string& profile, int channels) {
  if (profile == "desk") return desk(channels);
  if (profile == "paper") return paper(channels);
  if (profile == "micro") return micro(channels);
  throw ParameterError("unknown CNN profile '" + profile + "' (expected desk, paper or micro)");
}

int CnnConfig::min_input_length() const {
  int t = 1;
  for (std::size_t i = filters.size(); i-- > 0;) t = pools[i] * t + lengths[i] - 1;
  return t;
}

void CnnConfig::validate() const {
  if (filters.empty() || filters.size() != lengths.size() || filters.size() != pools.size()) {
    throw ParameterError("cnn config: filters, lengths and pools must have equal non-zero length");
  }
  if (input_channels < 1) throw ParameterError("cnn config: input_channels must be positive");
  for (std::size_t i = 0; i < filters.size(); ++i) {
    if (filters[i] < 1 || lengths[i] < 1 || pools[i] < 1) {
      throw ParameterError("cnn config: filters, lengths and pools must be positive");
    }
  }
  for (int d : dense) {
    if (d < 1) throw ParameterError("cnn config: dense sizes must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("cnn config: dropout in [0, 1)");
}

std::size_t CnnParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < conv_w.size(); ++i) n += conv_w[i].size() + conv_b[i].size();
  for (std::size_t i = 0; i < dense_w.size(); ++i) n += dense_w[i].size() + dense_b[i].size();
  return n;
}

CnnGrads CnnGrads::zeros_like(const CnnParams& p) {
  CnnGrads g;
  for (const auto& w : p.conv_w) g.conv_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : p.conv_b) g.conv_b.push_back(Eigen::VectorXd::Zero(b.size()));
  for (const auto& w : p.dense_w) g.dense_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : p.dense_b) g.dense_b.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

void CnnGrads::add(const CnnGrads& o) {
  for (std::size_t i = 0; i < conv_w.size(); ++i) conv_w[i] += o.conv_w[i];
  for (std::size_t i = 0; i < conv_b.size(); ++i) conv_b[i] += o.conv_b[i];
  for (std::size_t i = 0; i < dense_w.size(); ++i) dense_w[i] += o.dense_w[i];
  for (std::size_t i = 0; i < dense_b.size(); ++i) dense_b[i] += o.dense_b[i];
}

void CnnGrads::scale(double s) {
  for (auto& m : conv_w) m *= s;
  for (auto& v : conv_b) v *= s;
  for (auto& m : dense_w) m *= s;
  for (auto& v : dense_b) v *= s;
}

CnnParams cnn_init(const CnnConfig& config, std::uint64_t seed) {
  config.validate();
  CnnParams p;
  p.config = config;
  p.seed = seed;
  Rng rng = make_rng(seed, 3);
  int in = config.input_channels;
  for (std::size_t i = 0; i < config.filters.size(); ++i) {
    const int fan_in = in * config.lengths[i];
    p.conv_w.push_back(uniform_matrix(config.filters[i], fan_in, std::sqrt(6.0 / fan_in), rng));
    p.conv_b.push_back(Eigen::VectorXd::Zero(config.filters[i]));
    in = config.filters[i];
  }
  int width = 4 * in;
  for (int d : config.dense) {
    p.dense_w.push_back(uniform_matrix(d, width, std::sqrt(6.0 / width), rng));
    p.dense_b.push_back(Eigen::VectorXd::Zero(d));
    width = d;
  }
  p.dense_w.push_back(uniform_matrix(2, width, std::sqrt(6.0 / (width + 2)), rng));
  p.dense_b.push_back(Eigen::VectorXd::Zero(2));
  return p;
}

CnnMasks sample_cnn_masks(const CnnParams& p, Rng& rng) {
  CnnMasks masks;
  const double keep = 1.0 / (1.0 - p.config.dropout);
  for (int d : p.config.dense) {
    Eigen::VectorXd m(d);
    for (Eigen::Index k = 0; k < d; ++k) m(k) = uniform01(rng) < p.config.dropout ? 0.0 : keep;
    masks.push_back(std::move(m));
  }
  return masks;
}

Eigen::VectorXd global_pool(const Eigen::MatrixXd& a) {
  const Eigen::Index ch = a.rows();
  const auto t = static_cast<double>(a.cols());
  Eigen::VectorXd out(4 * ch);
  for (Eigen::Index k = 0; k < ch; ++k) {
    const double mean = a.row(k).mean();
    out(k) = mean;
    out(ch + k) = a.row(k).maxCoeff();
    out(2 * ch + k) = a.row(k).norm();
    out(3 * ch + k) = std::sqrt((a.row(k).array() - mean).square().sum() / t + kPoolStdEps);
  }
  return out;
}

Eigen::Vector2d cnn_forward(const CnnParams& p, const Eigen::MatrixXd& spec, const CnnMasks* masks) {
  ForwardCache c;
  forward(p, spec, masks, c);
  return c.prob;
}

double cnn_loss(const CnnParams& p, const Eigen::MatrixXd& spec, int label, const CnnMasks* masks,
                CnnGrads* grads) {
  if (label != 0 && label != 1) throw DataError("cnn label must be 0 or 1");
  ForwardCache c;
  forward(p, spec, masks, c);
  const double loss = -std::log(std::max(c.prob(label), 1e-300));
  if (grads != nullptr) backward(p, c, label, masks, *grads);
  return loss;
}

std::vector<double> cnn_train(CnnParams& p, const std::vector<Eigen::MatrixXd>& patches,
                              const std::vector<int>& labels, const CnnTrainOptions& opt) {
  if (patches.size() != labels.size() || patches.empty()) {
    throw DataError("cnn_train: need matching, non-empty patches and labels");
  }
  if (opt.minibatch < 1 || opt.epochs < 0) throw ParameterError("cnn_train: bad minibatch/epochs");
  bool pos = false, neg = false;
  for (int l : labels) (l == 1 ? pos : neg) = true;
  if (!pos || !neg) throw DataError("training labels contain a single class");

  // Each minibatch is cut into fixed chunks summed in order, so results do not depend on
  // the thread count.
  constexpr std::size_t kChunks = 8;
  Rng rng = make_rng(opt.seed, 4);
  Adam adam(opt.adam);
  std::vector<std::size_t> order(patches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> trace;
  const auto threads = static_cast<std::size_t>(std::max(1, opt.threads));
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle(order, rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.minibatch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.minibatch));
      const std::size_t b = end - start;
      std::vector<CnnMasks> masks(b);
      for (auto& m : masks) m = sample_cnn_masks(p, rng);
      std::vector<CnnGrads> chunk_grads(kChunks, CnnGrads::zeros_like(p));
      std::vector<double> chunk_loss(kChunks, 0.0);
      auto work = [&](std::size_t chunk) {
        for (std::size_t i = chunk; i < b; i += kChunks) {
          const std::size_t idx = order[start + i];
          chunk_loss[chunk] += cnn_loss(p, patches[idx], labels[idx], &masks[i], &chunk_grads[chunk]);
        }
      };
      if (threads == 1) {
        for (std::size_t k = 0; k < kChunks; ++k) work(k);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(threads, kChunks); ++w) {
          pool.emplace_back([&, w] {
            for (std::size_t k = w; k < kChunks; k += std::min(threads, kChunks)) work(k);
          });
        }
        for (auto& th : pool) th.join();
      }
      CnnGrads g = std::move(chunk_grads[0]);
      for (std::size_t k = 1; k < kChunks; ++k) g.add(chunk_grads[k]);
      g.scale(1.0 / static_cast<double>(b));
      for (double l : chunk_loss) total += l;
      adam.next();
      std::size_t slot = 0;
      for (std::size_t i = 0; i < p.conv_w.size(); ++i) {
        adam.update(slot++, p.conv_w[i], g.conv_w[i]);
        adam.update(slot++, p.conv_b[i], g.conv_b[i]);
      }
      for (std::size_t i = 0; i < p.dense_w.size(); ++i) {
        adam.update(slot++, p.dense_w[i], g.dense_w[i]);
        adam.update(slot++, p.dense_b[i], g.dense_b[i]);
      }
    }
    trace.push_back(total / static_cast<double>(patches.size()));
  }
  return trace;
}

double cnn_predict_ad(const CnnParams& p, const Eigen::MatrixXd& spec) {
  return cnn_forward(p, spec)(1);
}

dsp::CqtParams cnn_cqt_params() {
  dsp::CqtParams c;
  c.bins = kCnnCqtBins;
  c.bins_per_octave = 12;
  c.f_min = dsp::kCqtFmin;
  c.hop = kCnnCqtHop;
  c.window_scale = 1.0;
  return c;
}

Eigen::MatrixXd log_cqt(const dsp::AudioClip& clip) {
  const dsp::AudioClip prepared = dsp::prepare_for_analysis(clip);
  return dsp::log_compress(dsp::cqt(prepared, cnn_cqt_params()), kLogCqtPower, kLogCqtScale).magnitudes;
}

std::vector<SpectrogramPatch> cqt_patch_sample(const Eigen::MatrixXd& spec, int count,
                                               std::uint64_t seed, const std::string& ad_id,
                                               int patch_frames) {
  if (count < 0 || patch_frames < 1) throw ParameterError("patch count/length must be positive");
  Rng rng = make_rng(seed, 5);
  std::vector<SpectrogramPatch> out;
  for (int i = 0; i < count; ++i) {
    SpectrogramPatch patch;
    patch.ad_id = ad_id;
    patch.values = Eigen::MatrixXd::Zero(spec.rows(), patch_frames);
    if (spec.cols() <= patch_frames) {
      patch.values.leftCols(spec.cols()) = spec;
    } else {
      const auto span = static_cast<std::size_t>(spec.cols() - patch_frames + 1);
      patch.offset = static_cast<Eigen::Index>(uniform_index(rng, span));
      patch.values = spec.middleCols(patch.offset, patch_frames);
    }
    out.push_back(std::move(patch));
  }
  return out;
}

}  // namespace adq::models
