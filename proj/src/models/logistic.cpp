#include "adq/models/logistic.h"

#include <algorithm>
#include <cmath>

#include "adq/error.h"

namespace adq::models {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double smooth_loss(const Eigen::VectorXd& margin, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) s += softplus(margin(i)) - y(i) * margin(i);
  return s / static_cast<double>(margin.size());
}

void check_labels(const Eigen::VectorXd& y) {
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
  if (!pos || !neg) throw DataError("training labels contain a single class");
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double lr_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    double b, double lambda) {
  const Eigen::VectorXd margin = (z * w).array() + b;
  return smooth_loss(margin, y) + lambda * w.lpNorm<1>();
}

LinearModel lr_train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const std::vector<std::string>& names, const LrOptions& opt,
                     const LinearModel* warm) {
  if (x.rows() != y.size()) throw DataError("lr_train: row count mismatch");
  if (x.rows() < 2) throw DataError("lr_train: need at least two samples");
  if (!(opt.lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
  check_labels(y);

  LinearModel m;
  m.lambda = opt.lambda;
  m.column_names = names;
  m.standardization = Standardizer::fit(x, names);
  const Eigen::MatrixXd z = m.standardization.apply(x);
  const auto n = static_cast<double>(z.rows());
  const Eigen::Index d = z.cols();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  if (warm != nullptr && warm->weights.size() == d) {
    w = warm->weights;
    b = warm->intercept;
  }

  // Logistic loss curvature is at most 1/4; start from that Lipschitz bound.
  const double lip = 0.25 * (z.squaredNorm() + n) / n;
  double step = 1.0 / std::max(lip, 1e-12);

  Eigen::VectorXd margin = (z * w).array() + b;
  double f = smooth_loss(margin, y);
  m.objective_trace.push_back(f + opt.lambda * w.lpNorm<1>());
  Eigen::VectorXd w_new(d), margin_new(z.rows());
  for (int it = 0; it < opt.max_iters; ++it) {
    Eigen::VectorXd resid(z.rows());
    for (Eigen::Index i = 0; i < resid.size(); ++i) resid(i) = sigmoid(margin(i)) - y(i);
    const Eigen::VectorXd gw = z.transpose() * resid / n;
    const double gb = resid.sum() / n;

    step *= 2.0;
    double b_new = b, f_new = f, mapping = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (Eigen::Index j = 0; j < d; ++j) {
        w_new(j) = soft_threshold(w(j) - step * gw(j), step * opt.lambda);
      }
      b_new = b - step * gb;
      margin_new = (z * w_new).array() + b_new;
      f_new = smooth_loss(margin_new, y);
      const Eigen::VectorXd dw = w_new - w;
      const double db = b_new - b;
      const double quad = gw.dot(dw) + gb * db + (dw.squaredNorm() + db * db) / (2.0 * step);
      mapping = std::sqrt(dw.squaredNorm() + db * db) / step;
      if (f_new <= f + quad + 1e-12 * std::abs(f)) break;
      step *= 0.5;
    }
    const double obj_new = f_new + opt.lambda * w_new.lpNorm<1>();
    if (obj_new > m.objective_trace.back()) {
      // Rounding can leave a step that does not descend; stop at the better iterate.
      m.converged = mapping < opt.tol * 10.0;
      break;
    }
    w = w_new;
    b = b_new;
    margin = margin_new;
    f = f_new;
    m.objective_trace.push_back(obj_new);
    m.iterations = it + 1;
    if (mapping < opt.tol) {
      m.converged = true;
      break;
    }
  }
  m.weights = w;
  m.intercept = b;
  return m;
}

double lr_predict(const LinearModel& m, const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = m.standardization.apply_row(x);
  return sigmoid(z.dot(m.weights) + m.intercept);
}

Eigen::VectorXd lr_predict(const LinearModel& m, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd margin = (m.standardization.apply(x) * m.weights).array() + m.intercept;
  return margin.unaryExpr([](double v) { return sigmoid(v); });
}

std::vector<std::pair<std::string, double>> selected_coefficients(const LinearModel& m) {
  std::vector<std::pair<std::string, double>> out;
  for (Eigen::Index j = 0; j < m.weights.size(); ++j) {
    if (m.weights(j) != 0.0) {
      out.emplace_back(m.standardization.kept_names[static_cast<std::size_t>(j)], m.weights(j));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.second) != std::abs(b.second)) return std::abs(a.second) > std::abs(b.second);
    return a.first < b.first;
  });
  return out;
}

}  // namespace adq::models
