#pragma once

// Central finite differences against the hand-written backward passes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "awats/neural/model.hpp"

namespace awats::test {

struct GradCheck {
  double max_rel_error = 0.0;
  int checked = 0;
};

// `loss` runs a forward pass and returns the scalar loss; `backward` runs a
// forward and backward pass leaving gradients in the params. Up to
// `per_param` random entries of every parameter are probed.
inline GradCheck check_gradients(std::vector<nn::Param<double>*> params,
                                 const std::function<double()>& loss,
                                 const std::function<void()>& backward,
                                 int per_param, double h, uint64_t seed) {
  for (auto* p : params) p->grad.setZero();
  backward();
  std::mt19937_64 rng(seed);
  GradCheck out;
  for (auto* p : params) {
    const Eigen::Index n = p->value.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(per_param)));
    for (Eigen::Index i : idx) {
      double& v = p->value.data()[i];
      const double saved = v;
      v = saved + h;
      const double up = loss();
      v = saved - h;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad.data()[i];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - analytic) / scale);
      ++out.checked;
    }
  }
  return out;
}

// A small double-precision model and random batch for gradient checks.
struct GradCheckFixture {
  nn::ModelConfig config;
  nn::BatchInput<double> input;
  std::vector<int> labels;

  explicit GradCheckFixture(nn::InputMode mode, bool per_roi = false, uint64_t seed = 3) {
    config.mode = mode;
    config.n_rois = 4;
    config.window = 5;
    config.q = 2;
    config.n_classes = 3;
    config.extractor_hidden = 8;
    config.conv_filters = 8;
    config.conv_layers = 2;
    config.lstm_hidden = 8;
    config.lstm_layers = 2;
    config.head_hidden = 8;
    config.per_roi_extractor = per_roi;
    const int b = 6;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    input.batch = b;
    if (mode == nn::InputMode::kAwats) {
      input.data.resize(config.repr_width(), config.window * b * config.n_rois);
    } else {
      input.data.resize(config.n_rois, config.window * b);
    }
    for (Eigen::Index i = 0; i < input.data.size(); ++i) input.data.data()[i] = g(rng);
    for (int i = 0; i < b; ++i) labels.push_back(i % config.n_classes);
  }

  GradCheck run(int per_param = 12, double h = 1e-5) {
    nn::Model<double> model(config);
    model.init(11);
    model.set_update_running_stats(false);
    auto loss = [&] {
      return nn::softmax_cross_entropy<double>(model.forward(input, nn::Phase::kTrain),
                                               labels, nullptr);
    };
    auto backward = [&] {
      nn::Mat<double> d;
      nn::softmax_cross_entropy<double>(model.forward(input, nn::Phase::kTrain), labels, &d);
      model.backward(d);
    };
    return check_gradients(model.params(), loss, backward, per_param, h, 5);
  }
};

}  // namespace awats::test
