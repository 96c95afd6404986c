#pragma once

// The per-ROI feature extractor and the conv/LSTM decoder, composed into one
// jointly trained model.

#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "awats/errors.hpp"
#include "awats/neural/layers.hpp"
#include "awats/windowing.hpp"

namespace awats::nn {

// AWATS: windows of representation vectors pass through the extractor.
// ATS: windows of averaged series feed the decoder directly.
enum class InputMode { kAwats = 0, kAts = 1 };

const char* to_string(InputMode mode);

struct ModelConfig {
  InputMode mode = InputMode::kAwats;
  int n_rois = 0;
  int window = 15;
  int q = 10;
  int n_classes = 23;
  int extractor_hidden = 128;
  int conv_filters = 128;
  int conv_layers = 3;
  int lstm_hidden = 128;
  int lstm_layers = 3;
  int head_hidden = 64;
  // One extractor per ROI instead of a single shared one.
  bool per_roi_extractor = false;

  int repr_width() const { return 3 * q; }
  void validate() const;
};

// Dense -> ReLU -> BatchNorm -> Dense(1), applied to each 3q vector.
template <typename T>
class Extractor {
 public:
  Extractor() = default;
  Extractor(const std::string& name, int in, int hidden)
      : dense1_(name + ".dense1", in, hidden),
        bn_(name + ".bn", hidden),
        dense2_(name + ".dense2", hidden, 1) {}

  void init(std::mt19937_64& rng) {
    dense1_.init(rng);
    dense2_.init(rng);
  }

  // x: 3q x N. Returns 1 x N.
  template <typename Derived>
  Mat<T> forward(const Eigen::MatrixBase<Derived>& x, Phase phase,
                 bool update_running) {
    if (phase == Phase::kTrain && x.cols() < 2) {
      throw DomainError("batch norm in training needs at least 2 inputs");
    }
    return dense2_.forward(
        bn_.forward(relu_.forward(dense1_.forward(x)), phase, update_running));
  }

  void backward(const Mat<T>& dy) {
    dense1_.backward(relu_.backward(bn_.backward(dense2_.backward(dy))));
  }

  void collect(std::vector<Param<T>*>& out) {
    dense1_.collect(out);
    bn_.collect(out);
    dense2_.collect(out);
  }
  void collect_buffers(std::vector<Buffer<T>>& out) { bn_.collect_buffers(out); }

  Dense<T>& dense1() { return dense1_; }
  BatchNorm<T>& bn() { return bn_; }
  Dense<T>& dense2() { return dense2_; }

 private:
  Dense<T> dense1_;
  Relu<T> relu_;
  BatchNorm<T> bn_;
  Dense<T> dense2_;
};

// Batch input in the model's column layout.
//   AWATS: 3q x (W*B*R), column ((t*B + b)*R + r)
//   ATS:   R x (W*B),    column (t*B + b)
template <typename T>
struct BatchInput {
  Mat<T> data;
  int batch = 0;
};

template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& config) : config_(config) {
    config_.validate();
    const int r = config_.n_rois;
    if (config_.mode == InputMode::kAwats) {
      const int n_ext = config_.per_roi_extractor ? r : 1;
      for (int i = 0; i < n_ext; ++i) {
        const std::string name = config_.per_roi_extractor
                                     ? "extractor" + std::to_string(i)
                                     : std::string("extractor");
        extractors_.emplace_back(name, config_.repr_width(),
                                 config_.extractor_hidden);
      }
    }
    int in = r;
    for (int i = 0; i < config_.conv_layers; ++i) {
      convs_.emplace_back("conv" + std::to_string(i), in, config_.conv_filters);
      in = config_.conv_filters;
    }
    conv_relu_.resize(static_cast<std::size_t>(config_.conv_layers));
    for (int i = 0; i < config_.lstm_layers; ++i) {
      lstms_.emplace_back("lstm" + std::to_string(i), in, config_.lstm_hidden);
      in = config_.lstm_hidden;
    }
    head1_ = Dense<T>("head.dense1", in, config_.head_hidden);
    head2_ = Dense<T>("head.dense2", config_.head_hidden, config_.n_classes);
  }

  const ModelConfig& config() const { return config_; }

  void init(uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& e : extractors_) e.init(rng);
    for (auto& c : convs_) c.init(rng);
    for (auto& l : lstms_) l.init(rng);
    head1_.init(rng);
    head2_.init(rng);
  }

  // Running statistics are left untouched when false (gradient checks).
  void set_update_running_stats(bool on) { update_running_ = on; }

  // Regional series for the batch, R x (W*B): the extractor output in AWATS
  // mode, the input itself in ATS mode.
  Mat<T> series(const BatchInput<T>& in, Phase phase) {
    const int r = config_.n_rois;
    if (config_.mode == InputMode::kAts) {
      if (in.data.rows() != r) throw DimensionError("ATS input row count != R");
      return in.data;
    }
    if (in.data.rows() != config_.repr_width()) {
      throw DimensionError("representation width != 3q");
    }
    const Eigen::Index n = in.data.cols() / r;
    Mat<T> out(r, n);
    if (!config_.per_roi_extractor) {
      const Mat<T> y = extractors_[0].forward(in.data, phase, update_running_);
      out = Eigen::Map<const Mat<T>>(y.data(), r, n);
    } else {
      const Eigen::Index w = config_.repr_width();
      for (int i = 0; i < r; ++i) {
        Eigen::Map<const Mat<T>, 0, Eigen::OuterStride<>> cols(
            in.data.data() + i * w, w, n, Eigen::OuterStride<>(w * r));
        out.row(i) = extractors_[static_cast<std::size_t>(i)]
                         .forward(cols, phase, update_running_)
                         .row(0);
      }
    }
    return out;
  }

  // Logits, C x B.
  Mat<T> forward(const BatchInput<T>& in, Phase phase) {
    const int w = config_.window;
    if (in.batch < 1) throw DimensionError("empty batch");
    const Eigen::Index expected =
        static_cast<Eigen::Index>(w) * in.batch *
        (config_.mode == InputMode::kAwats ? config_.n_rois : 1);
    if (in.data.cols() != expected) {
      throw DimensionError("batch column count does not match R/W/B");
    }
    Mat<T> x = series(in, phase);
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      x = conv_relu_[i].forward(convs_[i].forward(x, w));
    }
    for (auto& l : lstms_) x = l.forward(x, w);
    last_hidden_cols_ = x.cols();
    const Mat<T> last = x.middleCols((w - 1) * in.batch, in.batch);
    batch_ = in.batch;
    return head2_.forward(head_relu_.forward(head1_.forward(last)));
  }

  // Accumulates gradients of the loss whose logit gradient is `dlogits`.
  void backward(const Mat<T>& dlogits) {
    const int w = config_.window;
    const Mat<T> dlast = head1_.backward(head_relu_.backward(head2_.backward(dlogits)));
    Mat<T> dx = Mat<T>::Zero(dlast.rows(), last_hidden_cols_);
    dx.middleCols((w - 1) * batch_, batch_) = dlast;
    for (auto it = lstms_.rbegin(); it != lstms_.rend(); ++it) dx = it->backward(dx);
    for (std::size_t i = convs_.size(); i-- > 0;) {
      dx = convs_[i].backward(conv_relu_[i].backward(dx));
    }
    if (config_.mode == InputMode::kAts) return;
    const int r = config_.n_rois;
    if (!config_.per_roi_extractor) {
      extractors_[0].backward(Eigen::Map<const Mat<T>>(dx.data(), 1, dx.size()));
    } else {
      for (int i = 0; i < r; ++i) {
        extractors_[static_cast<std::size_t>(i)].backward(dx.row(i));
      }
    }
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& e : extractors_) e.collect(out);
    for (auto& c : convs_) c.collect(out);
    for (auto& l : lstms_) l.collect(out);
    head1_.collect(out);
    head2_.collect(out);
    return out;
  }

  std::vector<Buffer<T>> buffers() {
    std::vector<Buffer<T>> out;
    for (auto& e : extractors_) e.collect_buffers(out);
    return out;
  }

  void zero_grad() {
    for (Param<T>* p : params()) p->grad.setZero();
  }

  std::vector<Extractor<T>>& extractors() { return extractors_; }
  std::vector<Conv1d<T>>& convs() { return convs_; }
  std::vector<Lstm<T>>& lstms() { return lstms_; }
  Dense<T>& head1() { return head1_; }
  Dense<T>& head2() { return head2_; }

 private:
  ModelConfig config_;
  bool update_running_ = true;
  std::vector<Extractor<T>> extractors_;
  std::vector<Conv1d<T>> convs_;
  std::vector<Relu<T>> conv_relu_;
  std::vector<Lstm<T>> lstms_;
  Dense<T> head1_;
  Relu<T> head_relu_;
  Dense<T> head2_;
  Eigen::Index last_hidden_cols_ = 0;
  int batch_ = 0;
};

// Packs samples into the model's input layout. Samples must match the
// config's R, W and (in AWATS mode) 3q.
template <typename T>
BatchInput<T> assemble_batch(const ModelConfig& config,
                             std::span<const WindowSample* const> samples) {
  const int r = config.n_rois;
  const int w = config.window;
  const auto b = static_cast<Eigen::Index>(samples.size());
  BatchInput<T> in;
  in.batch = static_cast<int>(samples.size());
  if (config.mode == InputMode::kAwats) {
    const int width = config.repr_width();
    in.data.resize(width, static_cast<Eigen::Index>(w) * b * r);
    for (Eigen::Index s = 0; s < b; ++s) {
      const WindowSample& ws = *samples[static_cast<std::size_t>(s)];
      if (ws.layout != FeatureLayout::kRepr || ws.n_rois != r ||
          ws.window != w || ws.repr_width != width) {
        throw DimensionError("sample shape does not match AWATS model");
      }
      for (int roi = 0; roi < r; ++roi) {
        for (int t = 0; t < w; ++t) {
          const double* src =
              ws.features.data() + (static_cast<std::size_t>(roi) * w + t) * width;
          const Eigen::Index col = (t * b + s) * r + roi;
          for (int k = 0; k < width; ++k) in.data(k, col) = static_cast<T>(src[k]);
        }
      }
    }
  } else {
    in.data.resize(r, static_cast<Eigen::Index>(w) * b);
    for (Eigen::Index s = 0; s < b; ++s) {
      const WindowSample& ws = *samples[static_cast<std::size_t>(s)];
      if (ws.layout != FeatureLayout::kSeries || ws.n_rois != r || ws.window != w) {
        throw DimensionError("sample shape does not match ATS model");
      }
      for (int roi = 0; roi < r; ++roi) {
        for (int t = 0; t < w; ++t) {
          in.data(roi, t * b + s) =
              static_cast<T>(ws.features[static_cast<std::size_t>(roi) * w + t]);
        }
      }
    }
  }
  return in;
}

// Copies parameters and buffers between models of identical architecture,
// converting the scalar type.
template <typename To, typename From>
void copy_weights(Model<To>& dst, Model<From>& src) {
  auto dp = dst.params();
  auto sp = src.params();
  if (dp.size() != sp.size()) throw DimensionError("model architectures differ");
  for (std::size_t i = 0; i < dp.size(); ++i) {
    dp[i]->value = sp[i]->value.template cast<To>();
  }
  auto db = dst.buffers();
  auto sb = src.buffers();
  for (std::size_t i = 0; i < db.size(); ++i) {
    *db[i].value = sb[i].value->template cast<To>();
  }
}

}  // namespace awats::nn
