#include "adq/models/model_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "adq/error.h"
#include "adq/features/extractor.h"

namespace adq::models {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'A', 'D', 'Q', 'M', 'O', 'D', 'E', 'L'};

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json standardizer_json(const Standardizer& s) {
  std::vector<long> kept(s.kept.begin(), s.kept.end());
  return {{"input_width", s.input_width},
          {"kept", kept},
          {"dropped_columns", s.dropped_names},
          {"mean", to_vec(s.mean)},
          {"scale", to_vec(s.scale)}};
}

Standardizer standardizer_from(const json& j, const std::vector<std::string>& names) {
  Standardizer s;
  s.input_width = j.at("input_width").get<long>();
  for (long k : j.at("kept").get<std::vector<long>>()) {
    if (k < 0 || k >= s.input_width || static_cast<std::size_t>(k) >= names.size()) {
      throw DataError("model file: kept column index out of range");
    }
    s.kept.push_back(k);
    s.kept_names.push_back(names[static_cast<std::size_t>(k)]);
  }
  s.dropped_names = j.at("dropped_columns").get<std::vector<std::string>>();
  s.mean = from_vec(j.at("mean").get<std::vector<double>>());
  s.scale = from_vec(j.at("scale").get<std::vector<double>>());
  if (s.mean.size() != static_cast<Eigen::Index>(s.kept.size()) || s.scale.size() != s.mean.size()) {
    throw DataError("model file: standardization size mismatch");
  }
  return s;
}

json adam_json(const AdamOptions& a) {
  return {{"learning_rate", a.learning_rate}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"epsilon", a.epsilon}};
}

AdamOptions adam_from(const json& j) {
  AdamOptions a;
  a.learning_rate = j.at("learning_rate").get<double>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.epsilon = j.at("epsilon").get<double>();
  return a;
}

class Payload {
 public:
  void put(const double* p, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(p[i]);
      for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  template <typename M>
  void put(const M& m) { put(m.data(), m.size()); }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  void get(double* out, Eigen::Index count) {
    const auto need = static_cast<std::size_t>(count) * 8;
    if (pos_ + need > n_) throw DataError("model file: payload truncated");
    for (Eigen::Index i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p_[pos_ + static_cast<std::size_t>(b)]) << (8 * b);
      out[i] = std::bit_cast<double>(bits);
      pos_ += 8;
    }
  }
  template <typename M>
  void get(M& m) { get(m.data(), m.size()); }
  bool done() const { return pos_ == n_; }

 private:
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> frame(const json& header, const Payload& payload) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  auto put_le = [&out](std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  };
  put_le(kModelFormatVersion, 4);
  put_le(0, 4);
  put_le(text.size(), 8);
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.bytes().begin(), payload.bytes().end());
  return out;
}

json linear_json(const LinearModel& m) {
  return {{"format", "adq-model"},
          {"format_version", kModelFormatVersion},
          {"kind", "logistic"},
          {"feature_ledger_version", features::kFeatureLedgerVersion},
          {"lambda", m.lambda},
          {"intercept", m.intercept},
          {"iterations", m.iterations},
          {"converged", m.converged},
          {"column_names", m.column_names},
          {"standardization", standardizer_json(m.standardization)},
          {"weights", to_vec(m.weights)}};
}

LinearModel linear_from(const json& j) {
  LinearModel m;
  m.lambda = j.at("lambda").get<double>();
  m.intercept = j.at("intercept").get<double>();
  m.iterations = j.at("iterations").get<int>();
  m.converged = j.at("converged").get<bool>();
  m.column_names = j.at("column_names").get<std::vector<std::string>>();
  m.standardization = standardizer_from(j.at("standardization"), m.column_names);
  m.weights = from_vec(j.at("weights").get<std::vector<double>>());
  if (m.weights.size() != static_cast<Eigen::Index>(m.standardization.kept.size())) {
    throw DataError("model file: weight count does not match kept columns");
  }
  return m;
}

std::vector<std::uint8_t> serialize_mlp(const MlpModel& m) {
  json header = {{"format", "adq-model"},
                 {"format_version", kModelFormatVersion},
                 {"kind", "mlp"},
                 {"feature_ledger_version", features::kFeatureLedgerVersion},
                 {"layer_sizes", m.params.sizes},
                 {"dropout", m.params.dropout},
                 {"seed", m.params.seed},
                 {"training", {{"batch_size", m.options.batch_size},
                               {"epochs", m.options.epochs},
                               {"seed", m.options.seed},
                               {"adam", adam_json(m.options.adam)}}},
                 {"loss_trace", m.loss_trace},
                 {"column_names", m.column_names},
                 {"standardization", standardizer_json(m.standardization)},
                 {"payload_layout", "per layer: weights (column-major out x in), biases"}};
  Payload payload;
  for (std::size_t l = 0; l < m.params.weights.size(); ++l) {
    payload.put(m.params.weights[l]);
    payload.put(m.params.biases[l]);
  }
  header["payload_count"] = payload.bytes().size() / 8;
  return frame(header, payload);
}

MlpModel mlp_from(const json& h, Reader& r) {
  MlpModel m;
  m.column_names = h.at("column_names").get<std::vector<std::string>>();
  m.standardization = standardizer_from(h.at("standardization"), m.column_names);
  const auto& t = h.at("training");
  m.options.batch_size = t.at("batch_size").get<int>();
  m.options.epochs = t.at("epochs").get<int>();
  m.options.seed = t.at("seed").get<std::uint64_t>();
  m.options.adam = adam_from(t.at("adam"));
  m.loss_trace = h.at("loss_trace").get<std::vector<double>>();
  m.params = mlp_init(h.at("layer_sizes").get<std::vector<int>>(), h.at("seed").get<std::uint64_t>(),
                      h.at("dropout").get<double>());
  for (std::size_t l = 0; l < m.params.weights.size(); ++l) {
    r.get(m.params.weights[l]);
    r.get(m.params.biases[l]);
  }
  if (m.params.sizes.front() != static_cast<int>(m.standardization.kept.size())) {
    throw DataError("model file: MLP input width does not match kept columns");
  }
  return m;
}

json cnn_config_json(const CnnConfig& c) {
  return {{"profile", c.profile}, {"input_channels", c.input_channels}, {"filters", c.filters},
          {"lengths", c.lengths}, {"pools", c.pools},   {"dense", c.dense},
          {"dropout", c.dropout}};
}

CnnConfig cnn_config_from(const json& j) {
  CnnConfig c;
  c.profile = j.at("profile").get<std::string>();
  c.input_channels = j.at("input_channels").get<int>();
  c.filters = j.at("filters").get<std::vector<int>>();
  c.lengths = j.at("lengths").get<std::vector<int>>();
  c.pools = j.at("pools").get<std::vector<int>>();
  c.dense = j.at("dense").get<std::vector<int>>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

std::vector<std::uint8_t> serialize_cnn(const CnnModel& m) {
  const auto cq = cnn_cqt_params();
  json header = {{"format", "adq-model"},
                 {"format_version", kModelFormatVersion},
                 {"kind", "cnn"},
                 {"architecture", cnn_config_json(m.params.config)},
                 {"seed", m.params.seed},
                 {"input", {{"cqt_bins", cq.bins},
                            {"bins_per_octave", cq.bins_per_octave},
                            {"f_min", cq.f_min},
                            {"hop", cq.hop},
                            {"log_power", kLogCqtPower},
                            {"log_scale", kLogCqtScale}}},
                 {"training", {{"minibatch", m.options.minibatch},
                               {"epochs", m.options.epochs},
                               {"seed", m.options.seed},
                               {"adam", adam_json(m.options.adam)}}},
                 {"loss_trace", m.loss_trace},
                 {"payload_layout",
                  "conv layers (weights column-major filters x length*channels, biases), "
                  "then dense layers (weights column-major out x in, biases)"}};
  Payload payload;
  for (std::size_t i = 0; i < m.params.conv_w.size(); ++i) {
    payload.put(m.params.conv_w[i]);
    payload.put(m.params.conv_b[i]);
  }
  for (std::size_t i = 0; i < m.params.dense_w.size(); ++i) {
    payload.put(m.params.dense_w[i]);
    payload.put(m.params.dense_b[i]);
  }
  header["payload_count"] = payload.bytes().size() / 8;
  return frame(header, payload);
}

CnnModel cnn_from(const json& h, Reader& r) {
  CnnModel m;
  m.params = cnn_init(cnn_config_from(h.at("architecture")), h.at("seed").get<std::uint64_t>());
  const auto& t = h.at("training");
  m.options.minibatch = t.at("minibatch").get<int>();
  m.options.epochs = t.at("epochs").get<int>();
  m.options.seed = t.at("seed").get<std::uint64_t>();
  m.options.adam = adam_from(t.at("adam"));
  m.loss_trace = h.at("loss_trace").get<std::vector<double>>();
  for (std::size_t i = 0; i < m.params.conv_w.size(); ++i) {
    r.get(m.params.conv_w[i]);
    r.get(m.params.conv_b[i]);
  }
  for (std::size_t i = 0; i < m.params.dense_w.size(); ++i) {
    r.get(m.params.dense_w[i]);
    r.get(m.params.dense_b[i]);
  }
  return m;
}

}  // namespace

std::string model_kind(const AnyModel& model) {
  switch (model.index()) {
    case 0: return "logistic";
    case 1: return "mlp";
    default: return "cnn";
  }
}

std::vector<std::uint8_t> serialize_model(const AnyModel& model) {
  if (const auto* lr = std::get_if<LinearModel>(&model)) {
    const std::string text = linear_json(*lr).dump(2) + "\n";
    return {text.begin(), text.end()};
  }
  if (const auto* mlp = std::get_if<MlpModel>(&model)) return serialize_mlp(*mlp);
  return serialize_cnn(std::get<CnnModel>(model));
}

AnyModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  try {
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kMagic, 8) == 0) {
      if (bytes.size() < 24) throw DataError("model file: truncated header");
      auto le = [&bytes](std::size_t at, int n) {
        std::uint64_t v = 0;
        for (int b = 0; b < n; ++b) v |= static_cast<std::uint64_t>(bytes[at + static_cast<std::size_t>(b)]) << (8 * b);
        return v;
      };
      if (le(8, 4) != kModelFormatVersion) throw DataError("model file: unsupported version");
      const std::uint64_t len = le(16, 8);
      if (24 + len > bytes.size()) throw DataError("model file: truncated header");
      const json header = json::parse(bytes.begin() + 24, bytes.begin() + 24 + static_cast<long>(len));
      Reader r(bytes.data() + 24 + len, bytes.size() - 24 - len);
      const std::string kind = header.at("kind").get<std::string>();
      AnyModel out;
      if (kind == "mlp") {
        out = mlp_from(header, r);
      } else if (kind == "cnn") {
        out = cnn_from(header, r);
      } else {
        throw DataError("model file: unknown kind '" + kind + "'");
      }
      if (!r.done()) throw DataError("model file: trailing payload bytes");
      return out;
    }
    const json doc = json::parse(bytes.begin(), bytes.end());
    if (doc.at("kind").get<std::string>() != "logistic") throw DataError("model file: unknown kind");
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw DataError("model file: unsupported version");
    }
    return linear_from(doc);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace adq::models
