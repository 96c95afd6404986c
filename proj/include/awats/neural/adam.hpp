#pragma once

#include <cmath>
#include <vector>

#include "awats/neural/layers.hpp"

namespace awats::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(std::vector<Param<T>*> params, AdamConfig config)
      : params_(std::move(params)), config_(config) {
    for (Param<T>* p : params_) {
      m_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(config_.beta1, t_));
    const T c2 = static_cast<T>(1.0 - std::pow(config_.beta2, t_));
    const T lr = static_cast<T>(config_.learning_rate);
    const T eps = static_cast<T>(config_.epsilon);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param<T>& p = *params_[i];
      m_[i] = b1 * m_[i] + (T(1) - b1) * p.grad;
      v_[i] = b2 * v_[i] + (T(1) - b2) * p.grad.cwiseAbs2();
      p.value.array() -=
          lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
    }
  }

  long steps() const { return t_; }

 private:
  std::vector<Param<T>*> params_;
  AdamConfig config_;
  std::vector<Mat<T>> m_, v_;
  long t_ = 0;
};

}  // namespace awats::nn
