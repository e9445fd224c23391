#include <doctest.h>

#include <algorithm>

#include "adq/error.h"
#include "adq/eval/auc.h"
#include "adq/models/feature_matrix.h"
#include "adq/models/logistic.h"
#include "helpers.h"

using namespace adq;
using namespace adq::models;
using testing::Gen;

namespace {

std::vector<std::string> names_for(Eigen::Index d) {
  std::vector<std::string> n;
  for (Eigen::Index j = 0; j < d; ++j) n.push_back("f" + std::to_string(j));
  return n;
}

struct Data {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

/// Labels drawn from a logistic model on the first `informative` columns.
Data noisy_data(Gen& g, int n, int d, int informative) {
  Data s{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double z = 0.0;
    for (int j = 0; j < d; ++j) {
      s.x(i, j) = g.normal() * (1.0 + j % 3) + j;
      if (j < informative) z += (j % 2 ? -1.0 : 1.0) * (s.x(i, j) - j) / (1.0 + j % 3);
    }
    s.y(i) = g.uniform() < 1.0 / (1.0 + std::exp(-z)) ? 1.0 : 0.0;
  }
  s.y(0) = 1.0;
  s.y(1) = 0.0;
  return s;
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<int> as_labels(const Eigen::VectorXd& v) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(v(i)));
  return out;
}

}  // namespace

TEST_SUITE("linear") {

TEST_CASE("standardizer") {
  Gen g(41);
  Eigen::MatrixXd x(30, 4);
  for (int i = 0; i < 30; ++i) {
    x(i, 0) = g.normal() * 5.0 + 3.0;
    x(i, 1) = 7.0;
    x(i, 2) = g.uniform(-1.0, 1.0);
    x(i, 3) = g.normal() * 1e-3;
  }
  const auto s = Standardizer::fit(x, names_for(4));
  CHECK(s.kept == std::vector<Eigen::Index>{0, 2, 3});
  CHECK(s.dropped_names == std::vector<std::string>{"f1"});
  const Eigen::MatrixXd z = s.apply(x);
  REQUIRE(z.cols() == 3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double mean = z.col(j).mean();
    const double var = (z.col(j).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
  CHECK((s.apply(x) - z).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 30; ++i) CHECK((s.apply_row(x.row(i).transpose()) - z.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("feature matrix validation") {
  FeatureMatrix m;
  m.rows = Eigen::MatrixXd::Zero(2, 2);
  m.column_names = {"a", "a"};
  m.ad_ids = {"x", "y"};
  CHECK_THROWS_AS(m.validate(), DataError);
  m.column_names = {"a", "b"};
  m.validate();
  m.rows(1, 1) = std::nan("");
  CHECK_THROWS_AS(m.validate(), DataError);
  m.rows(1, 1) = 4.0;
  const auto sub = m.subset({1});
  CHECK(sub.ad_ids == std::vector<std::string>{"y"});
  CHECK(sub.rows(0, 1) == 4.0);
}

TEST_CASE("sigmoid and soft threshold") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) == 1.0);
  Gen g(42);
  double prev = -1.0;
  std::vector<double> probes;
  for (int i = 0; i < 500; ++i) probes.push_back(g.uniform(-30.0, 30.0));
  std::sort(probes.begin(), probes.end());
  for (double z : probes) {
    CHECK(sigmoid(z) >= prev);
    prev = sigmoid(z);
  }
  for (int i = 0; i < 1000; ++i) {
    const double v = g.uniform(-5.0, 5.0);
    const double t = g.uniform(0.0, 3.0);
    const double expected = (v > 0 ? 1.0 : -1.0) * std::max(std::abs(v) - t, 0.0);
    CHECK(soft_threshold(v, t) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("zero weights predict one half") {
  Gen g(43);
  const auto d = noisy_data(g, 40, 5, 2);
  auto m = lr_train(d.x, d.y, names_for(5), {1e6, 100, 1e-6});
  m.weights.setZero();
  m.intercept = 0.0;
  for (int i = 0; i < 40; ++i) CHECK(lr_predict(m, Eigen::VectorXd(d.x.row(i).transpose())) == 0.5);
}

TEST_CASE("a huge penalty leaves only the intercept") {
  Gen g(44);
  const auto d = noisy_data(g, 80, 6, 3);
  const auto m = lr_train(d.x, d.y, names_for(6), {1e6, 5000, 1e-10});
  CHECK(m.weights.cwiseAbs().maxCoeff() == 0.0);
  CHECK(selected_coefficients(m).empty());
  const double p = d.y.mean();
  CHECK(m.intercept == doctest::Approx(std::log(p / (1.0 - p))).epsilon(1e-6));
}

TEST_CASE("separable blobs are ranked perfectly") {
  Gen g(45);
  Eigen::MatrixXd x(200, 2);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    y(i) = i % 2;
    const double c = y(i) ? 2.5 : -2.5;
    x(i, 0) = c + 0.5 * g.normal();
    x(i, 1) = c + 0.5 * g.normal();
  }
  const auto m = lr_train(x, y, names_for(2), {0.01, 5000, 1e-8});
  CHECK(eval::auc(as_vector(lr_predict(m, x)), as_labels(y)) >= 0.99);
}

TEST_CASE("objective never increases") {
  Gen g(46);
  for (double lambda : {0.0, 0.003, 0.03, 0.3}) {
    const auto d = noisy_data(g, 120, 15, 4);
    const auto m = lr_train(d.x, d.y, names_for(15), {lambda, 3000, 1e-9});
    REQUIRE(m.objective_trace.size() > 2);
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i) CHECK(m.objective_trace[i] <= m.objective_trace[i - 1]);
  }
}

TEST_CASE("unpenalized fit reaches a stationary point") {
  Gen g(47);
  const auto d = noisy_data(g, 150, 6, 3);
  const double tol = 1e-7;
  const auto m = lr_train(d.x, d.y, names_for(6), {0.0, 20000, tol});
  CHECK(m.converged);
  const Eigen::MatrixXd z = m.standardization.apply(d.x);
  Eigen::VectorXd gw = Eigen::VectorXd::Zero(z.cols());
  double gb = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double margin = m.intercept;
    for (Eigen::Index j = 0; j < z.cols(); ++j) margin += z(i, j) * m.weights(j);
    const double r = 1.0 / (1.0 + std::exp(-margin)) - d.y(i);
    gw += r * z.row(i).transpose();
    gb += r;
  }
  gw /= static_cast<double>(z.rows());
  gb /= static_cast<double>(z.rows());
  CHECK(std::sqrt(gw.squaredNorm() + gb * gb) < 10.0 * tol);
}

TEST_CASE("prediction matches the scalar formula") {
  Gen g(48);
  const auto d = noisy_data(g, 60, 8, 3);
  const auto m = lr_train(d.x, d.y, names_for(8), {0.01, 3000, 1e-8});
  const auto& s = m.standardization;
  for (int probe = 0; probe < 50; ++probe) {
    Eigen::VectorXd x(8);
    for (int j = 0; j < 8; ++j) x(j) = g.normal() * 3.0;
    double margin = m.intercept;
    for (std::size_t k = 0; k < s.kept.size(); ++k) {
      const double z = (x(s.kept[k]) - s.mean(static_cast<Eigen::Index>(k))) / s.scale(static_cast<Eigen::Index>(k));
      margin += z * m.weights(static_cast<Eigen::Index>(k));
    }
    const double expected = 1.0 / (1.0 + std::exp(-margin));
    CHECK(std::abs(lr_predict(m, x) - expected) < 1e-12);
  }
}

TEST_CASE("selected coefficients") {
  LinearModel m;
  m.standardization.kept_names = {"a", "b", "c"};
  m.weights = Eigen::VectorXd::Zero(3);
  CHECK(selected_coefficients(m).empty());
  m.weights(1) = -0.5;
  const auto one = selected_coefficients(m);
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == "b");
  m.weights(0) = 0.5;
  m.weights(2) = 0.9;
  const auto all = selected_coefficients(m);
  REQUIRE(all.size() == 3);
  CHECK(all[0].first == "c");
  CHECK(all[1].first == "a");
  CHECK(all[2].first == "b");
}

TEST_CASE("support shrinks as the penalty grows") {
  Gen g(49);
  const auto d = noisy_data(g, 200, 40, 5);
  std::size_t prev = 41;
  for (double lambda : {0.001, 0.01, 0.1}) {
    const auto m = lr_train(d.x, d.y, names_for(40), {lambda, 5000, 1e-8});
    const auto support = selected_coefficients(m).size();
    CAPTURE(lambda);
    CHECK(support <= prev);
    prev = support;
  }
  CHECK(prev < 40);
}

TEST_CASE("predictions survive a column permutation") {
  Gen g(50);
  const auto d = noisy_data(g, 100, 10, 4);
  std::vector<int> perm(10);
  for (int j = 0; j < 10; ++j) perm[static_cast<std::size_t>(j)] = j;
  for (int j = 9; j > 0; --j) std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(g.integer(0, j))]);
  Eigen::MatrixXd xp(100, 10);
  std::vector<std::string> np(10);
  const auto names = names_for(10);
  for (int j = 0; j < 10; ++j) {
    xp.col(j) = d.x.col(perm[static_cast<std::size_t>(j)]);
    np[static_cast<std::size_t>(j)] = names[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
  }
  const auto a = lr_train(d.x, d.y, names, {0.01, 5000, 1e-10});
  const auto b = lr_train(xp, d.y, np, {0.01, 5000, 1e-10});
  CHECK((lr_predict(a, d.x) - lr_predict(b, xp)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("training is deterministic and rejects one class") {
  Gen g(51);
  const auto d = noisy_data(g, 50, 5, 2);
  const auto a = lr_train(d.x, d.y, names_for(5), {0.01, 1000, 1e-8});
  const auto b = lr_train(d.x, d.y, names_for(5), {0.01, 1000, 1e-8});
  CHECK(a.weights == b.weights);
  CHECK(a.intercept == b.intercept);
  CHECK_THROWS_AS(lr_train(d.x, Eigen::VectorXd::Ones(50), names_for(5), {}), DataError);
  CHECK_THROWS_AS(lr_train(d.x, d.y, names_for(5), {-1.0}), ParameterError);
}

}  // TEST_SUITE
