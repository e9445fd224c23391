#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace adq::models {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with one moment pair per parameter block. Call next() once per step, then
/// update() for every block.
class Adam {
 public:
  explicit Adam(AdamOptions opt = {}) : opt_(opt) {}

  void next() { ++t_; }
  long steps() const { return t_; }

  template <typename P, typename G>
  void update(std::size_t slot, Eigen::DenseBase<P>& param, const Eigen::DenseBase<G>& grad) {
    if (slot >= m_.size()) {
      m_.resize(slot + 1);
      v_.resize(slot + 1);
    }
    auto& m = m_[slot];
    auto& v = v_[slot];
    if (m.size() != grad.size()) {
      m = Eigen::ArrayXd::Zero(grad.size());
      v = Eigen::ArrayXd::Zero(grad.size());
    }
    const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    const Eigen::Index rows = param.rows();
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
      const double g = grad.derived()(k % rows, k / rows);
      m(k) = opt_.beta1 * m(k) + (1.0 - opt_.beta1) * g;
      v(k) = opt_.beta2 * v(k) + (1.0 - opt_.beta2) * g * g;
      const double mhat = m(k) / c1;
      const double vhat = v(k) / c2;
      param.derived()(k % rows, k / rows) -= opt_.learning_rate * mhat / (std::sqrt(vhat) + opt_.epsilon);
    }
  }

 private:
  AdamOptions opt_;
  long t_ = 0;
  std::vector<Eigen::ArrayXd> m_;
  std::vector<Eigen::ArrayXd> v_;
};

}  // namespace adq::models
