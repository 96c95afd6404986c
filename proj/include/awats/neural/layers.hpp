#pragma once

// Differentiable layers with hand-written reverse-mode gradients.
//
// Activations are column-major matrices with one column per batch element.
// Sequences of length W over a batch of B use W*B columns in time-major
// order (column t*B + b), so one time step is a contiguous block of B
// columns. All layers are templated on the scalar type: float for training,
// double for finite-difference gradient checks.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace awats::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct Param {
  std::string name;
  Mat<T> value;
  Mat<T> grad;

  void resize(Eigen::Index rows, Eigen::Index cols) {
    value = Mat<T>::Zero(rows, cols);
    grad = Mat<T>::Zero(rows, cols);
  }
};

// Non-trainable state saved with a model (batch-norm running statistics).
template <typename T>
struct Buffer {
  std::string name;
  Vec<T>* value;
};

enum class Phase { kTrain, kEval };

template <typename T>
void init_uniform(Mat<T>& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<T>(dist(rng));
  }
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, int in, int out) {
    w_.name = name + ".w";
    b_.name = name + ".b";
    w_.resize(out, in);
    b_.resize(out, 1);
  }

  void init(std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(w_.value.cols()));
    init_uniform(w_.value, bound, rng);
    init_uniform(b_.value, bound, rng);
  }

  template <typename Derived>
  Mat<T> forward(const Eigen::MatrixBase<Derived>& x) {
    x_ = x;
    Mat<T> y = w_.value * x_;
    y.colwise() += b_.value.col(0);
    return y;
  }

  Mat<T> backward(const Mat<T>& dy) {
    w_.grad.noalias() += dy * x_.transpose();
    b_.grad.col(0) += dy.rowwise().sum();
    return w_.value.transpose() * dy;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }

  Param<T>& weight() { return w_; }
  Param<T>& bias() { return b_; }
  int in() const { return static_cast<int>(w_.value.cols()); }
  int out() const { return static_cast<int>(w_.value.rows()); }

 private:
  Param<T> w_, b_;
  Mat<T> x_;
};

template <typename T>
class Relu {
 public:
  Mat<T> forward(Mat<T> x) {
    x = x.cwiseMax(T(0));
    y_ = x;
    return x;
  }
  Mat<T> backward(const Mat<T>& dy) const {
    return (y_.array() > T(0)).select(dy, T(0));
  }

 private:
  Mat<T> y_;
};

// Per-feature normalisation over all columns of the input.
template <typename T>
class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(const std::string& name, int features, double momentum = 0.1,
            double epsilon = 1e-5)
      : momentum_(momentum), epsilon_(epsilon) {
    gamma_.name = name + ".gamma";
    beta_.name = name + ".beta";
    gamma_.resize(features, 1);
    gamma_.value.setOnes();
    beta_.resize(features, 1);
    running_mean_ = Vec<T>::Zero(features);
    running_var_ = Vec<T>::Ones(features);
    mean_name_ = name + ".running_mean";
    var_name_ = name + ".running_var";
  }

  // Batch statistics are used in training; running statistics are updated
  // only when `update_running` is set.
  Mat<T> forward(const Mat<T>& x, Phase phase, bool update_running) {
    phase_ = phase;
    const auto n = static_cast<T>(x.cols());
    if (phase == Phase::kTrain) {
      batch_mean_ = x.rowwise().mean();
      Mat<T> centered = x.colwise() - batch_mean_;
      batch_var_ = centered.cwiseAbs2().rowwise().sum() / n;
      inv_std_ = (batch_var_.array() + T(epsilon_)).rsqrt().matrix();
      xhat_ = centered.array().colwise() * inv_std_.array();
      if (update_running) {
        const T m = static_cast<T>(momentum_);
        const T unbias = x.cols() > 1 ? n / (n - T(1)) : T(1);
        running_mean_ = (T(1) - m) * running_mean_ + m * batch_mean_;
        running_var_ = (T(1) - m) * running_var_ + m * unbias * batch_var_;
      }
    } else {
      inv_std_ = (running_var_.array() + T(epsilon_)).rsqrt().matrix();
      xhat_ = (x.colwise() - running_mean_).array().colwise() * inv_std_.array();
    }
    Mat<T> y = xhat_.array().colwise() * gamma_.value.col(0).array();
    y.colwise() += beta_.value.col(0);
    return y;
  }

  Mat<T> backward(const Mat<T>& dy) {
    gamma_.grad.col(0) += (dy.array() * xhat_.array()).rowwise().sum().matrix();
    beta_.grad.col(0) += dy.rowwise().sum();
    Mat<T> dxhat = dy.array().colwise() * gamma_.value.col(0).array();
    if (phase_ == Phase::kEval) {
      return dxhat.array().colwise() * inv_std_.array();
    }
    const auto n = static_cast<T>(dy.cols());
    const Vec<T> sum_dxhat = dxhat.rowwise().sum();
    const Vec<T> sum_dxhat_xhat = (dxhat.array() * xhat_.array()).rowwise().sum();
    Mat<T> dx = (dxhat * n).colwise() - sum_dxhat;
    dx.array() -= xhat_.array().colwise() * sum_dxhat_xhat.array();
    dx.array().colwise() *= inv_std_.array() / n;
    return dx;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  void collect_buffers(std::vector<Buffer<T>>& out) {
    out.push_back({mean_name_, &running_mean_});
    out.push_back({var_name_, &running_var_});
  }

  const Vec<T>& batch_mean() const { return batch_mean_; }
  const Vec<T>& batch_var() const { return batch_var_; }
  Vec<T>& running_mean() { return running_mean_; }
  Vec<T>& running_var() { return running_var_; }
  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  double epsilon() const { return epsilon_; }

 private:
  Param<T> gamma_, beta_;
  Vec<T> running_mean_, running_var_;
  std::string mean_name_, var_name_;
  double momentum_ = 0.1;
  double epsilon_ = 1e-5;
  Phase phase_ = Phase::kTrain;
  Vec<T> batch_mean_, batch_var_, inv_std_;
  Mat<T> xhat_;
};

// Kernel-3, padding-1 convolution along time, channels as rows.
template <typename T>
class Conv1d {
 public:
  static constexpr int kKernel = 3;

  Conv1d() = default;
  Conv1d(const std::string& name, int in_channels, int out_channels)
      : in_(in_channels) {
    w_.name = name + ".w";
    b_.name = name + ".b";
    w_.resize(out_channels, kKernel * in_channels);
    b_.resize(out_channels, 1);
  }

  void init(std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(kKernel * in_));
    init_uniform(w_.value, bound, rng);
    init_uniform(b_.value, bound, rng);
  }

  // x: in_channels x (W*B), time-major.
  Mat<T> forward(const Mat<T>& x, int window) {
    window_ = window;
    batch_ = static_cast<int>(x.cols()) / window;
    const Eigen::Index b = batch_;
    cols_ = Mat<T>::Zero(kKernel * in_, x.cols());
    for (int k = 0; k < kKernel; ++k) {
      for (int t = 0; t < window; ++t) {
        const int src = t + k - 1;
        if (src < 0 || src >= window) continue;
        cols_.block(k * in_, t * b, in_, b) = x.block(0, src * b, in_, b);
      }
    }
    Mat<T> y = w_.value * cols_;
    y.colwise() += b_.value.col(0);
    return y;
  }

  Mat<T> backward(const Mat<T>& dy) {
    w_.grad.noalias() += dy * cols_.transpose();
    b_.grad.col(0) += dy.rowwise().sum();
    const Mat<T> dcols = w_.value.transpose() * dy;
    const Eigen::Index b = batch_;
    Mat<T> dx = Mat<T>::Zero(in_, dy.cols());
    for (int k = 0; k < kKernel; ++k) {
      for (int t = 0; t < window_; ++t) {
        const int src = t + k - 1;
        if (src < 0 || src >= window_) continue;
        dx.block(0, src * b, in_, b) += dcols.block(k * in_, t * b, in_, b);
      }
    }
    return dx;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w_);
    out.push_back(&b_);
  }

  Param<T>& weight() { return w_; }
  Param<T>& bias() { return b_; }
  int in() const { return in_; }
  int out() const { return static_cast<int>(w_.value.rows()); }

 private:
  Param<T> w_, b_;
  int in_ = 0;
  int window_ = 0;
  int batch_ = 0;
  Mat<T> cols_;
};

// Single LSTM layer, gate order (input, forget, cell, output).
template <typename T>
class Lstm {
 public:
  Lstm() = default;
  Lstm(const std::string& name, int in, int hidden) : hidden_(hidden) {
    wx_.name = name + ".wx";
    wh_.name = name + ".wh";
    b_.name = name + ".b";
    wx_.resize(4 * hidden, in);
    wh_.resize(4 * hidden, hidden);
    b_.resize(4 * hidden, 1);
  }

  void init(std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(hidden_));
    init_uniform(wx_.value, bound, rng);
    init_uniform(wh_.value, bound, rng);
    b_.value.setZero();
    b_.value.block(hidden_, 0, hidden_, 1).setConstant(T(1));
  }

  // x: in x (W*B) time-major; returns hidden states H x (W*B).
  Mat<T> forward(const Mat<T>& x, int window) {
    window_ = window;
    batch_ = static_cast<int>(x.cols()) / window;
    const Eigen::Index h = hidden_;
    const Eigen::Index b = batch_;
    x_ = x;
    gates_ = wx_.value * x;
    gates_.colwise() += b_.value.col(0);
    c_.resize(h, x.cols());
    tanh_c_.resize(h, x.cols());
    h_.resize(h, x.cols());
    for (int t = 0; t < window; ++t) {
      auto g = gates_.middleCols(t * b, b);
      if (t > 0) g.noalias() += wh_.value * h_.middleCols((t - 1) * b, b);
      g.topRows(2 * h) = g.topRows(2 * h).unaryExpr([](T v) { return sigmoid(v); });
      g.middleRows(2 * h, h) = g.middleRows(2 * h, h).array().tanh();
      g.bottomRows(h) = g.bottomRows(h).unaryExpr([](T v) { return sigmoid(v); });
      auto c = c_.middleCols(t * b, b);
      c = g.topRows(h).cwiseProduct(g.middleRows(2 * h, h));
      if (t > 0) c += g.middleRows(h, h).cwiseProduct(c_.middleCols((t - 1) * b, b));
      tanh_c_.middleCols(t * b, b) = c.array().tanh();
      h_.middleCols(t * b, b) =
          g.bottomRows(h).cwiseProduct(tanh_c_.middleCols(t * b, b));
    }
    return h_;
  }

  // dh: gradient w.r.t. every hidden state output, H x (W*B).
  Mat<T> backward(const Mat<T>& dh_seq) {
    const Eigen::Index h = hidden_;
    const Eigen::Index b = batch_;
    Mat<T> dpre(4 * h, dh_seq.cols());
    Mat<T> dh_next = Mat<T>::Zero(h, b);
    Mat<T> dc_next = Mat<T>::Zero(h, b);
    Mat<T> dc(h, b), dh(h, b);
    for (int t = window_ - 1; t >= 0; --t) {
      const auto g = gates_.middleCols(t * b, b);
      const auto in_gate = g.topRows(h).array();
      const auto forget = g.middleRows(h, h).array();
      const auto cell = g.middleRows(2 * h, h).array();
      const auto out_gate = g.bottomRows(h).array();
      const auto tc = tanh_c_.middleCols(t * b, b).array();

      dh = dh_seq.middleCols(t * b, b) + dh_next;
      dc = dc_next.array() + dh.array() * out_gate * (T(1) - tc.square());
      auto d = dpre.middleCols(t * b, b);
      d.topRows(h) = (dc.array() * cell * in_gate * (T(1) - in_gate)).matrix();
      if (t > 0) {
        d.middleRows(h, h) = (dc.array() * c_.middleCols((t - 1) * b, b).array() *
                              forget * (T(1) - forget))
                                 .matrix();
      } else {
        d.middleRows(h, h).setZero();
      }
      d.middleRows(2 * h, h) = (dc.array() * in_gate * (T(1) - cell.square())).matrix();
      d.bottomRows(h) = (dh.array() * tc * out_gate * (T(1) - out_gate)).matrix();
      dc_next = (dc.array() * forget).matrix();
      if (t > 0) {
        wh_.grad.noalias() += d * h_.middleCols((t - 1) * b, b).transpose();
        dh_next.noalias() = wh_.value.transpose() * d;
      }
    }
    wx_.grad.noalias() += dpre * x_.transpose();
    b_.grad.col(0) += dpre.rowwise().sum();
    return wx_.value.transpose() * dpre;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&wx_);
    out.push_back(&wh_);
    out.push_back(&b_);
  }

  int hidden() const { return hidden_; }
  int in() const { return static_cast<int>(wx_.value.cols()); }
  Param<T>& wx() { return wx_; }
  Param<T>& wh() { return wh_; }
  Param<T>& bias() { return b_; }
  const Mat<T>& cell_states() const { return c_; }

 private:
  Param<T> wx_, wh_, b_;
  int hidden_ = 0;
  int window_ = 0;
  int batch_ = 0;
  Mat<T> x_, gates_, c_, tanh_c_, h_;
};

// Mean softmax cross-entropy over the batch (columns of `logits`).
// Writes d(loss)/d(logits) into `dlogits`.
template <typename T>
double softmax_cross_entropy(const Mat<T>& logits, const std::vector<int>& labels,
                             Mat<T>* dlogits) {
  const Eigen::Index c = logits.rows();
  const Eigen::Index n = logits.cols();
  double loss = 0.0;
  if (dlogits != nullptr) dlogits->resize(c, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const T mx = logits.col(j).maxCoeff();
    Vec<T> e = (logits.col(j).array() - mx).exp();
    const T sum = e.sum();
    const int y = labels[static_cast<std::size_t>(j)];
    loss += static_cast<double>(std::log(sum) - (logits(y, j) - mx));
    if (dlogits != nullptr) {
      dlogits->col(j) = e / sum;
      (*dlogits)(y, j) -= T(1);
    }
  }
  if (dlogits != nullptr) *dlogits /= static_cast<T>(n);
  return loss / static_cast<double>(n);
}

template <typename T>
Mat<T> softmax(const Mat<T>& logits) {
  Mat<T> p(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const T mx = logits.col(j).maxCoeff();
    p.col(j) = (logits.col(j).array() - mx).exp();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

}  // namespace awats::nn
