#include "adq/app/commands.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <thread>

#include "adq/app/feature_file.h"
#include "adq/app/spectrogram_file.h"
#include "adq/app/synth.h"
#include "adq/engagement/csv.h"
#include "adq/engagement/engagement.h"
#include "adq/error.h"
#include "adq/eval/cross_validate.h"
#include "adq/eval/report.h"
#include "adq/features/extractor.h"
#include "adq/models/logistic.h"
#include "adq/models/model_io.h"

namespace adq::app {

namespace {

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void require(const fs::path& p, const char* what) {
  if (p.empty()) throw ParameterError(std::string("missing ") + what);
}

struct Labeled {
  std::vector<std::string> ad_ids;
  std::vector<int> labels;
  models::FeatureMatrix features;
  std::vector<Eigen::MatrixXd> spectrograms;
};

std::map<std::string, int> label_map(const fs::path& path) {
  std::map<std::string, int> out;
  for (const auto& l : engagement::read_labels_csv(path)) {
    if (!out.emplace(l.ad_id, l.label).second) throw DataError("duplicate ad_id '" + l.ad_id + "' in labels");
  }
  return out;
}

/// Ads present in the labels and in every requested input, ordered by ad_id.
Labeled load_labeled(const fs::path& labels_path, const fs::path& features_path,
                     const fs::path& spec_dir, std::ostream& log) {
  const auto labels = label_map(labels_path);
  Labeled out;
  std::map<std::string, Eigen::Index> feature_row;
  models::FeatureMatrix all;
  if (!features_path.empty()) {
    all = read_feature_file(features_path);
    for (Eigen::Index i = 0; i < all.n(); ++i) {
      if (!feature_row.emplace(all.ad_ids[static_cast<std::size_t>(i)], i).second) {
        throw DataError("duplicate ad_id '" + all.ad_ids[static_cast<std::size_t>(i)] + "' in features");
      }
    }
  }
  std::vector<Eigen::Index> rows;
  std::size_t missing = 0;
  for (const auto& [ad, label] : labels) {
    const auto fr = feature_row.find(ad);
    if (!features_path.empty() && fr == feature_row.end()) {
      ++missing;
      continue;
    }
    if (!spec_dir.empty()) {
      const fs::path p = spec_dir / (ad + kSpectrogramExtension);
      if (!fs::exists(p)) {
        ++missing;
        continue;
      }
      out.spectrograms.push_back(read_spectrogram(p).values);
    }
    if (!features_path.empty()) rows.push_back(fr->second);
    out.ad_ids.push_back(ad);
    out.labels.push_back(label);
  }
  if (missing > 0) log << "skipped " << missing << " labeled ads without inputs\n";
  if (!features_path.empty()) {
    out.features.column_names = all.column_names;
    out.features.ad_ids = out.ad_ids;
    out.features.rows.resize(static_cast<Eigen::Index>(rows.size()), all.d());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.features.rows.row(static_cast<Eigen::Index>(i)) = all.rows.row(rows[i]);
    }
  }
  if (out.ad_ids.empty()) throw DataError("no labeled ads with inputs");
  return out;
}

Eigen::VectorXd as_vector(const std::vector<int>& y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

/// Columns of fm reordered to `names`; throws if any is absent.
Eigen::MatrixXd align_columns(const models::FeatureMatrix& fm, const std::vector<std::string>& names) {
  std::map<std::string, Eigen::Index> col;
  for (std::size_t c = 0; c < fm.column_names.size(); ++c) col[fm.column_names[c]] = static_cast<Eigen::Index>(c);
  Eigen::MatrixXd out(fm.n(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto it = col.find(names[c]);
    if (it == col.end()) throw DataError("feature column '" + names[c] + "' missing from input");
    out.col(static_cast<Eigen::Index>(c)) = fm.rows.col(it->second);
  }
  return out;
}

models::CnnTrainOptions cnn_options(std::optional<int> epochs, std::optional<int> batch,
                                    std::uint64_t seed, int workers) {
  models::CnnTrainOptions o;
  if (epochs) o.epochs = *epochs;
  if (batch) o.minibatch = *batch;
  o.seed = seed;
  o.threads = workers;
  return o;
}

models::MlpTrainOptions mlp_options(std::optional<int> epochs, std::optional<int> batch, std::uint64_t seed) {
  models::MlpTrainOptions o;
  if (epochs) o.epochs = *epochs;
  if (batch) o.batch_size = *batch;
  o.seed = seed;
  return o;
}

StoredSpectrogram stored(const Eigen::MatrixXd& values) {
  const auto p = models::cnn_cqt_params();
  StoredSpectrogram s;
  s.header.bins = static_cast<std::uint32_t>(values.rows());
  s.header.frames = static_cast<std::uint32_t>(values.cols());
  s.header.hop = static_cast<std::uint32_t>(p.hop);
  s.header.sample_rate = dsp::kAnalysisRate;
  s.header.bins_per_octave = static_cast<std::uint32_t>(p.bins_per_octave);
  s.header.f_min = p.f_min;
  s.header.power = models::kLogCqtPower;
  s.header.scale = models::kLogCqtScale;
  s.values = values;
  return s;
}

int partial_status(std::size_t ok, std::size_t failed) {
  if (failed == 0) return kExitOk;
  return ok == 0 ? kExitData : kExitPartial;
}

}  // namespace

std::vector<fs::path> list_wavs(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("no such file or directory: " + path.string());
  if (!fs::is_directory(path)) return {path};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file() && lower_ext(e.path()) == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no WAV files in " + path.string());
  return out;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

int run_guarded(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const ParameterError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
}

int cmd_extract(const ExtractConfig& cfg, std::ostream& log) {
  require(cfg.audio, "audio input");
  require(cfg.out, "output path");
  const auto files = list_wavs(cfg.audio);
  std::vector<std::optional<features::FeatureVector>> rows(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), cfg.workers, [&](std::size_t i) {
    try {
      rows[i] = features::extract_features(dsp::read_wav(files[i]));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<features::FeatureVector> ok;
  std::vector<ExtractFailure> failed;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (rows[i]) {
      ok.push_back(std::move(*rows[i]));
    } else {
      failed.push_back({files[i].filename().string(), errors[i]});
      log << "failed: " << files[i].filename().string() << ": " << errors[i] << "\n";
    }
  }
  std::sort(ok.begin(), ok.end(), [](const auto& a, const auto& b) { return a.ad_id < b.ad_id; });
  for (std::size_t i = 1; i < ok.size(); ++i) {
    if (ok[i].ad_id == ok[i - 1].ad_id) throw DataError("duplicate ad_id '" + ok[i].ad_id + "'");
  }
  if (cfg.out.has_parent_path()) fs::create_directories(cfg.out.parent_path());
  write_feature_file(cfg.out, ok, failed);
  log << "extracted " << ok.size() << " of " << files.size() << " files, " << features::feature_total()
      << " features each\n";
  return partial_status(ok.size(), failed.size());
}

int cmd_spectrogram(const SpectrogramConfig& cfg, std::ostream& log) {
  require(cfg.audio, "audio input");
  require(cfg.out_dir, "output directory");
  const auto files = list_wavs(cfg.audio);
  fs::create_directories(cfg.out_dir);
  std::vector<std::optional<std::string>> errors(files.size());
  parallel_for(files.size(), cfg.workers, [&](std::size_t i) {
    try {
      const auto clip = dsp::read_wav(files[i]);
      write_spectrogram(cfg.out_dir / (clip.id + kSpectrogramExtension), stored(models::log_cqt(clip)));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::size_t failed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i]) continue;
    ++failed;
    log << "failed: " << files[i].filename().string() << ": " << *errors[i] << "\n";
  }
  log << "wrote " << files.size() - failed << " of " << files.size() << " spectrograms\n";
  return partial_status(files.size() - failed, failed);
}

int cmd_label(const LabelConfig& cfg, std::ostream& log) {
  require(cfg.log, "event log");
  require(cfg.out, "output path");
  const auto metric = engagement::parse_metric(cfg.metric);
  const auto records = engagement::parse_event_log(cfg.log);
  const auto stats = engagement::compute_stats(records, cfg.dwell_seconds);
  const auto kept = engagement::filter_ads(stats.ads, metric);
  const auto labels = engagement::percentile_label(kept, metric, cfg.top_pct, cfg.bottom_pct);
  {
    auto out = open_out(cfg.out);
    engagement::write_labels_csv(out, labels);
  }
  if (!cfg.stats_out.empty()) {
    auto out = open_out(cfg.stats_out);
    engagement::write_stats_csv(out, stats.ads);
  }
  const auto good = std::count_if(labels.begin(), labels.end(), [](const auto& l) { return l.label == 1; });
  log << "records " << records.size() << ", ads " << stats.ads.size() << " (without impressions "
      << stats.omitted_without_impressions << "), after filter " << kept.size() << ", good " << good
      << ", bad " << static_cast<long>(labels.size()) - good << "\n";
  if (!stats.issues.empty()) {
    log << "warning: " << stats.issues.size() << " long clicks from users without an impression\n";
  }
  return kExitOk;
}

int cmd_train(const TrainConfig& cfg, std::ostream& log) {
  require(cfg.labels, "labels");
  require(cfg.out, "output path");
  const auto method = eval::parse_method(cfg.method);
  if (method == eval::Method::oracle || method == eval::Method::coin_flip) {
    throw ParameterError("method " + cfg.method + " has no trainable model");
  }
  if (method == eval::Method::cnn) {
    require(cfg.spectrograms, "spectrogram directory");
    const auto data = load_labeled(cfg.labels, {}, cfg.spectrograms, log);
    std::vector<Eigen::MatrixXd> patches;
    std::vector<int> patch_labels;
    for (std::size_t i = 0; i < data.ad_ids.size(); ++i) {
      for (const auto& p : models::cqt_patch_sample(data.spectrograms[i], models::kPatchesPerAd, cfg.seed + i,
                                                    data.ad_ids[i])) {
        patches.push_back(p.values);
        patch_labels.push_back(data.labels[i]);
      }
    }
    models::CnnModel m;
    const auto channels = static_cast<int>(data.spectrograms.front().rows());
    m.params = models::cnn_init(models::CnnConfig::by_name(cfg.profile, channels), cfg.seed);
    m.options = cnn_options(cfg.epochs, cfg.batch, cfg.seed, cfg.workers);
    m.loss_trace = models::cnn_train(m.params, patches, patch_labels, m.options);
    models::save_model(cfg.out, m);
    log << "trained CNN (" << cfg.profile << ", " << m.params.parameter_count() << " parameters) on "
        << patches.size() << " patches from " << data.ad_ids.size() << " ads; final loss "
        << m.loss_trace.back() << "\n";
    return kExitOk;
  }
  require(cfg.features, "feature file");
  const auto data = load_labeled(cfg.labels, cfg.features, {}, log);
  const Eigen::VectorXd y = as_vector(data.labels);
  const auto& fm = data.features;
  if (method == eval::Method::mlp) {
    const auto m = models::mlp_fit(fm.rows, y, fm.column_names, mlp_options(cfg.epochs, cfg.batch, cfg.seed));
    models::save_model(cfg.out, m);
    log << "trained MLP on " << fm.n() << " ads; final loss " << m.loss_trace.back() << "\n";
    return kExitOk;
  }
  models::LrOptions o;
  if (method == eval::Method::l1_lr) {
    o.lambda = cfg.lambda ? *cfg.lambda : eval::select_lambda(fm.rows, data.labels, fm.column_names, cfg.seed);
  }
  const auto m = models::lr_train(fm.rows, y, fm.column_names, o);
  models::save_model(cfg.out, m);
  log << "trained " << eval::method_name(method) << " on " << fm.n() << " ads; lambda " << m.lambda
      << ", nonzero weights " << models::selected_coefficients(m).size() << ", iterations "
      << m.iterations << (m.converged ? "" : " (not converged)") << "\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateConfig& cfg, std::ostream& log) {
  require(cfg.labels, "labels");
  require(cfg.out_dir, "output directory");
  if (cfg.methods.empty()) throw ParameterError("no methods given");
  std::vector<eval::Method> methods;
  bool need_features = false, need_specs = false;
  for (const auto& name : cfg.methods) {
    methods.push_back(eval::parse_method(name));
    need_features |= methods.back() == eval::Method::lr || methods.back() == eval::Method::l1_lr ||
                     methods.back() == eval::Method::mlp;
    need_specs |= methods.back() == eval::Method::cnn;
  }
  if (need_features) require(cfg.features, "feature file");
  if (need_specs) require(cfg.spectrograms, "spectrogram directory");
  const auto data = load_labeled(cfg.labels, need_features ? cfg.features : fs::path{},
                                 need_specs ? cfg.spectrograms : fs::path{}, log);
  eval::EvalDataset ds;
  ds.ad_ids = data.ad_ids;
  ds.labels = data.labels;
  if (need_features) ds.features = &data.features;
  if (need_specs) ds.spectrograms = &data.spectrograms;

  eval::EvalOptions opt;
  opt.k = cfg.folds;
  opt.seed = cfg.seed;
  opt.lambda = cfg.lambda;
  opt.mlp = mlp_options(cfg.epochs, cfg.batch, cfg.seed);
  opt.cnn_train = cnn_options(cfg.epochs, cfg.batch, cfg.seed, 1);
  if (need_specs) opt.cnn = models::CnnConfig::by_name(cfg.profile, static_cast<int>(data.spectrograms.front().rows()));
  opt.workers = cfg.workers;
  const auto plan = eval::stratified_kfold(ds.labels, cfg.folds, cfg.seed);

  std::vector<eval::EvalReport> reports;
  for (auto m : methods) {
    reports.push_back(eval::cross_validate(m, ds, plan, opt));
    log << eval::method_name(m) << ": mean AUC " << reports.back().mean_auc << " +/- "
        << reports.back().ci_half_width << "\n";
  }
  fs::create_directories(cfg.out_dir);
  {
    auto out = open_out(cfg.out_dir / "folds.csv");
    eval::write_fold_csv(out, reports);
  }
  {
    auto out = open_out(cfg.out_dir / "summary.txt");
    out << eval::summary_table(reports);
  }
  {
    auto out = open_out(cfg.out_dir / "runtime.csv");
    eval::write_runtime_csv(out, reports);
  }
  {
    auto out = open_out(cfg.out_dir / "runtime.txt");
    out << eval::runtime_table(reports);
  }
  log << eval::summary_table(reports) << eval::runtime_table(reports);
  return kExitOk;
}

int cmd_score(const ScoreConfig& cfg, std::ostream& log) {
  require(cfg.model, "model");
  require(cfg.input, "input");
  require(cfg.out, "output path");
  const auto model = models::load_model(cfg.model);
  std::vector<std::string> ids;
  std::vector<double> probs;
  std::size_t failed = 0;

  if (const auto* cnn = std::get_if<models::CnnModel>(&model)) {
    std::vector<fs::path> inputs;
    if (fs::is_directory(cfg.input)) {
      for (const auto& e : fs::directory_iterator(cfg.input)) {
        const auto ext = lower_ext(e.path());
        if (e.is_regular_file() && (ext == ".wav" || ext == kSpectrogramExtension)) inputs.push_back(e.path());
      }
      std::sort(inputs.begin(), inputs.end());
      if (inputs.empty()) throw DataError("no WAV or spectrogram files in " + cfg.input.string());
    } else {
      inputs = list_wavs(cfg.input);
    }
    ids.resize(inputs.size());
    probs.assign(inputs.size(), -1.0);
    std::vector<std::string> errors(inputs.size());
    parallel_for(inputs.size(), cfg.workers, [&](std::size_t i) {
      try {
        ids[i] = inputs[i].stem().string();
        const Eigen::MatrixXd spec = lower_ext(inputs[i]) == ".wav" ? models::log_cqt(dsp::read_wav(inputs[i]))
                                                                   : read_spectrogram(inputs[i]).values;
        probs[i] = models::cnn_predict_ad(cnn->params, spec);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (probs[i] >= 0.0) continue;
      ++failed;
      log << "failed: " << inputs[i].filename().string() << ": " << errors[i] << "\n";
    }
  } else {
    models::FeatureMatrix fm;
    if (!fs::is_directory(cfg.input) && lower_ext(cfg.input) == ".csv") {
      fm = read_feature_file(cfg.input);
    } else {
      const auto files = list_wavs(cfg.input);
      std::vector<std::optional<features::FeatureVector>> rows(files.size());
      std::vector<std::string> errors(files.size());
      parallel_for(files.size(), cfg.workers, [&](std::size_t i) {
        try {
          rows[i] = features::extract_features(dsp::read_wav(files[i]));
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      });
      fm.column_names = features::feature_names();
      std::vector<const features::FeatureVector*> ok;
      for (std::size_t i = 0; i < files.size(); ++i) {
        if (rows[i]) {
          ok.push_back(&*rows[i]);
        } else {
          ++failed;
          log << "failed: " << files[i].filename().string() << ": " << errors[i] << "\n";
        }
      }
      fm.rows.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(fm.column_names.size()));
      for (std::size_t i = 0; i < ok.size(); ++i) {
        fm.ad_ids.push_back(ok[i]->ad_id);
        fm.rows.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(ok[i]->values.data(), fm.rows.cols());
      }
    }
    Eigen::VectorXd p;
    if (const auto* lr = std::get_if<models::LinearModel>(&model)) {
      p = models::lr_predict(*lr, align_columns(fm, lr->column_names));
    } else {
      const auto& mlp = std::get<models::MlpModel>(model);
      p = models::mlp_predict(mlp, align_columns(fm, mlp.column_names));
    }
    ids = fm.ad_ids;
    probs.assign(p.data(), p.data() + p.size());
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (probs[i] >= 0.0) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  auto out = open_out(cfg.out);
  csv::write_row(out, {"ad_id", "probability"});
  for (std::size_t i : order) csv::write_row(out, {ids[i], csv::format_double(probs[i])});
  log << "scored " << order.size() << " ads with a " << models::model_kind(model) << " model\n";
  return partial_status(order.size(), failed);
}

int cmd_report(const ReportConfig& cfg, std::ostream& log) {
  require(cfg.out_dir, "output directory");
  fs::create_directories(cfg.out_dir);
  std::size_t rows = 0;
  if (!cfg.features.empty()) rows = static_cast<std::size_t>(read_feature_file(cfg.features).n());
  {
    auto out = open_out(cfg.out_dir / "feature_ledger.txt");
    out << features::feature_ledger_text(rows);
  }
  log << features::feature_ledger_text(rows);
  if (!cfg.model.empty()) {
    const auto model = models::load_model(cfg.model);
    const auto* lr = std::get_if<models::LinearModel>(&model);
    if (!lr) {
      log << "coefficient report needs a linear model; got " << models::model_kind(model) << "\n";
      return kExitOk;
    }
    auto out = open_out(cfg.out_dir / "coefficients.csv");
    eval::write_coefficients_csv(out, *lr);
    log << "wrote " << models::selected_coefficients(*lr).size() << " nonzero coefficients (lambda "
        << lr->lambda << ")\n";
  }
  return kExitOk;
}

int cmd_synth(const SynthConfig& cfg, std::ostream& log) {
  require(cfg.out_dir, "output directory");
  SynthOptions o;
  o.ads = cfg.ads;
  o.seconds = cfg.seconds;
  o.seed = cfg.seed;
  const auto ads = synth_corpus(o);
  fs::create_directories(cfg.out_dir / "audio");
  for (const auto& a : ads) dsp::write_wav_pcm16(cfg.out_dir / "audio" / (a.clip.id + ".wav"), a.clip);
  {
    auto out = open_out(cfg.out_dir / "events.csv");
    write_synth_event_log(out, ads, cfg.seed);
  }
  const auto stats = engagement::compute_stats(engagement::parse_event_log(cfg.out_dir / "events.csv"));
  std::map<std::string, double> lcr;
  for (const auto& s : stats.ads) lcr[s.ad_id] = s.lcr;
  std::vector<engagement::QualityLabel> truth;
  {
    auto out = open_out(cfg.out_dir / "truth.csv");
    csv::write_row(out, {"ad_id", "label", "tempo_bpm", "snr_db"});
    for (const auto& a : ads) {
      csv::write_row(out, {a.clip.id, std::to_string(a.label), csv::format_double(a.tempo_bpm),
                           csv::format_double(a.snr_db)});
      truth.push_back({a.clip.id, a.label, engagement::Metric::lcr, lcr[a.clip.id]});
    }
  }
  {
    auto out = open_out(cfg.out_dir / "truth_labels.csv");
    engagement::write_labels_csv(out, truth);
  }
  log << "wrote " << ads.size() << " ads to " << (cfg.out_dir / "audio").string() << "\n";
  return kExitOk;
}

}  // namespace adq::app
