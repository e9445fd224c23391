#include "adq/eval/cross_validate.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cctype>
#include <cmath>
#include <thread>

#include "adq/error.h"
#include "adq/eval/auc.h"
#include "adq/models/logistic.h"
#include "adq/models/random.h"

namespace adq::eval {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd take_labels(const std::vector<int>& y, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y[idx[i]];
  return out;
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(fold) + 1;
}

FoldResult run_fold(Method method, const EvalDataset& data, const FoldPlan& plan,
                    const EvalOptions& opt, int f) {
  const auto train = plan.train_indices(f);
  const auto& test = plan.test_indices(f);
  FoldResult r;
  r.fold = f;
  r.n_test = static_cast<int>(test.size());
  std::vector<int> test_labels;
  for (std::size_t i : test) {
    test_labels.push_back(data.labels[i]);
    (data.labels[i] == 1 ? r.n_pos : r.n_neg) += 1;
  }
  std::vector<double> scores(test.size(), 0.0);

  auto t0 = Clock::now();
  switch (method) {
    case Method::oracle: {
      r.train_seconds = 0.0;
      t0 = Clock::now();
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = test_labels[i];
      break;
    }
    case Method::coin_flip: {
      r.train_seconds = 0.0;
      t0 = Clock::now();
      models::Rng rng = models::make_rng(fold_seed(opt.seed, f), 21);
      for (auto& s : scores) s = models::uniform01(rng);
      break;
    }
    case Method::lr:
    case Method::l1_lr: {
      const auto& fm = *data.features;
      const Eigen::MatrixXd x = take_rows(fm.rows, train);
      std::vector<int> y_train;
      for (std::size_t i : train) y_train.push_back(data.labels[i]);
      models::LrOptions lro;
      if (method == Method::l1_lr) {
        lro.lambda = opt.lambda ? *opt.lambda : select_lambda(x, y_train, fm.column_names, fold_seed(opt.seed, f));
      }
      r.lambda = lro.lambda;
      const auto model = models::lr_train(x, take_labels(data.labels, train), fm.column_names, lro);
      r.train_seconds = seconds_since(t0);
      t0 = Clock::now();
      const Eigen::VectorXd p = models::lr_predict(model, take_rows(fm.rows, test));
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = p(static_cast<Eigen::Index>(i));
      break;
    }
    case Method::mlp: {
      const auto& fm = *data.features;
      auto mo = opt.mlp;
      mo.seed = fold_seed(opt.mlp.seed ^ opt.seed, f);
      const auto model = models::mlp_fit(take_rows(fm.rows, train), take_labels(data.labels, train),
                                         fm.column_names, mo);
      r.train_seconds = seconds_since(t0);
      t0 = Clock::now();
      const Eigen::VectorXd p = models::mlp_predict(model, take_rows(fm.rows, test));
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = p(static_cast<Eigen::Index>(i));
      break;
    }
    case Method::cnn: {
      const auto& specs = *data.spectrograms;
      const std::uint64_t s = fold_seed(opt.cnn_train.seed ^ opt.seed, f);
      std::vector<Eigen::MatrixXd> patches;
      std::vector<int> patch_labels;
      for (std::size_t i : train) {
        const auto sampled = models::cqt_patch_sample(specs[i], opt.patches_per_ad, s + i,
                                                      data.ad_ids[i], opt.patch_frames);
        for (const auto& p : sampled) {
          patches.push_back(p.values);
          patch_labels.push_back(data.labels[i]);
        }
      }
      auto params = models::cnn_init(opt.cnn, s);
      auto co = opt.cnn_train;
      co.seed = s;
      models::cnn_train(params, patches, patch_labels, co);
      r.train_seconds = seconds_since(t0);
      t0 = Clock::now();
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = models::cnn_predict_ad(params, specs[test[i]]);
      break;
    }
  }
  r.predict_seconds = seconds_since(t0);
  r.auc = auc(scores, test_labels);
  return r;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::lr: return "LR";
    case Method::l1_lr: return "L1-LR";
    case Method::mlp: return "MLP";
    case Method::cnn: return "CNN";
    case Method::oracle: return "oracle";
    case Method::coin_flip: return "coin-flip";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  std::string t;
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "lr") return Method::lr;
  if (t == "l1-lr" || t == "l1lr" || t == "lr-l1") return Method::l1_lr;
  if (t == "mlp") return Method::mlp;
  if (t == "cnn") return Method::cnn;
  if (t == "oracle") return Method::oracle;
  if (t == "coin-flip" || t == "coin") return Method::coin_flip;
  throw ParameterError("unknown method '" + text + "' (expected LR, L1-LR, MLP, CNN, oracle, coin-flip)");
}

void EvalDataset::validate(Method m) const {
  if (labels.size() != ad_ids.size()) throw DataError("dataset: labels and ad ids differ in length");
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("dataset: labels must be 0 or 1");
  }
  if (m == Method::lr || m == Method::l1_lr || m == Method::mlp) {
    if (!features) throw DataError("dataset: " + method_name(m) + " needs a feature matrix");
    features->validate();
    if (static_cast<std::size_t>(features->n()) != labels.size()) {
      throw DataError("dataset: feature rows and labels differ in count");
    }
  }
  if (m == Method::cnn) {
    if (!spectrograms) throw DataError("dataset: CNN needs spectrograms");
    if (spectrograms->size() != labels.size()) throw DataError("dataset: spectrograms and labels differ in count");
  }
}

void EvalReport::summarize() {
  const auto n = static_cast<double>(folds.size());
  if (folds.empty()) {
    mean_auc = 0.0;
    ci_half_width = 0.0;
    return;
  }
  double s = 0.0;
  for (const auto& f : folds) s += f.auc;
  mean_auc = s / n;
  double ss = 0.0;
  for (const auto& f : folds) ss += (f.auc - mean_auc) * (f.auc - mean_auc);
  const double sd = folds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  ci_half_width = 1.96 * sd / std::sqrt(n);
}

double select_lambda(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                     const std::vector<std::string>& names, std::uint64_t seed) {
  const FoldPlan inner = stratified_kfold(labels, kInnerFolds, seed);
  std::vector<double> grid = kLambdaGrid;
  std::sort(grid.rbegin(), grid.rend());
  std::vector<double> total(grid.size(), 0.0);
  for (int f = 0; f < kInnerFolds; ++f) {
    const auto tr = inner.train_indices(f);
    const auto& te = inner.test_indices(f);
    const Eigen::MatrixXd xt = take_rows(x, tr);
    const Eigen::VectorXd yt = take_labels(labels, tr);
    const Eigen::MatrixXd xv = take_rows(x, te);
    std::vector<int> yv;
    for (std::size_t i : te) yv.push_back(labels[i]);
    models::LinearModel prev;
    bool have_prev = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      models::LrOptions o;
      o.lambda = grid[g];
      auto m = models::lr_train(xt, yt, names, o, have_prev ? &prev : nullptr);
      const Eigen::VectorXd p = models::lr_predict(m, xv);
      total[g] += auc(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), yv);
      prev = std::move(m);
      have_prev = true;
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (total[g] > total[best]) best = g;
  }
  return grid[best];
}

EvalReport cross_validate(Method method, const EvalDataset& data, const FoldPlan& plan,
                          const EvalOptions& opt) {
  data.validate(method);
  if (plan.fold_of.size() != data.labels.size()) throw DataError("fold plan does not match dataset size");
  EvalReport rep;
  rep.method = method_name(method);
  rep.k = plan.k;
  rep.seed = plan.seed;
  rep.folds.resize(static_cast<std::size_t>(plan.k));

  const int workers = std::clamp(opt.workers, 1, plan.k);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(plan.k));
  auto work = [&] {
    for (int f = next++; f < plan.k; f = next++) {
      try {
        rep.folds[static_cast<std::size_t>(f)] = run_fold(method, data, plan, opt, f);
      } catch (...) {
        errors[static_cast<std::size_t>(f)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  rep.summarize();
  return rep;
}

EvalReport cross_validate(Method method, const EvalDataset& data, const EvalOptions& opt) {
  const FoldPlan plan = stratified_kfold(data.labels, opt.k, opt.seed);
  return cross_validate(method, data, plan, opt);
}

}  // namespace adq::eval
