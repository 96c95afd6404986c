#include "awats/neural/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "awats/errors.hpp"
#include "awats/seed.hpp"

namespace awats::nn {

namespace {

constexpr int kEvalChunk = 256;

std::vector<const WindowSample*> gather(const std::vector<WindowSample>& samples,
                                        std::span<const int> idx) {
  std::vector<const WindowSample*> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(&samples[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<int> labels_of(const std::vector<const WindowSample*>& batch) {
  std::vector<int> labels;
  labels.reserve(batch.size());
  for (const WindowSample* s : batch) labels.push_back(s->label);
  return labels;
}

int count_correct(const Mat<float>& logits, const std::vector<int>& labels) {
  int correct = 0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Eigen::Index arg = 0;
    logits.col(j).maxCoeff(&arg);
    if (static_cast<int>(arg) == labels[static_cast<std::size_t>(j)]) ++correct;
  }
  return correct;
}

}  // namespace

const char* to_string(InputMode mode) {
  return mode == InputMode::kAwats ? "awats" : "ats";
}

void ModelConfig::validate() const {
  if (n_rois < 1) throw ConfigError("model needs at least one ROI");
  if (window < 1) throw ConfigError("window must be positive");
  if (n_classes < 2) throw ConfigError("model needs at least two classes");
  if (mode == InputMode::kAwats && q < 1) throw ConfigError("q must be positive");
  if (extractor_hidden < 1 || conv_filters < 1 || conv_layers < 1 ||
      lstm_hidden < 1 || lstm_layers < 1 || head_hidden < 1) {
    throw ConfigError("layer widths and depths must be positive");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

ModelConfig model_config_for(const std::vector<WindowSample>& samples,
                             int n_classes) {
  if (samples.empty()) throw ValidationError("empty dataset");
  const WindowSample& s = samples.front();
  ModelConfig c;
  c.mode = s.layout == FeatureLayout::kRepr ? InputMode::kAwats : InputMode::kAts;
  c.n_rois = s.n_rois;
  c.window = s.window;
  c.q = s.layout == FeatureLayout::kRepr ? s.repr_width / 3 : 0;
  c.n_classes = n_classes;
  return c;
}

EvalStats evaluate(Model<float>& model, const std::vector<WindowSample>& samples,
                   std::span<const int> idx) {
  EvalStats stats;
  if (idx.empty()) return stats;
  double loss_sum = 0.0;
  int correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto n = std::min<std::size_t>(kEvalChunk, idx.size() - start);
    const auto batch = gather(samples, idx.subspan(start, n));
    const auto labels = labels_of(batch);
    const Mat<float> logits =
        model.forward(assemble_batch<float>(model.config(), batch), Phase::kEval);
    loss_sum += softmax_cross_entropy<float>(logits, labels, nullptr) *
                static_cast<double>(n);
    correct += count_correct(logits, labels);
  }
  stats.loss = loss_sum / static_cast<double>(idx.size());
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  return stats;
}

Mat<float> predict_proba(Model<float>& model,
                         const std::vector<WindowSample>& samples,
                         std::span<const int> idx) {
  Mat<float> out(model.config().n_classes, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto n = std::min<std::size_t>(kEvalChunk, idx.size() - start);
    const auto batch = gather(samples, idx.subspan(start, n));
    out.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) =
        softmax<float>(model.forward(assemble_batch<float>(model.config(), batch),
                                     Phase::kEval));
  }
  return out;
}

std::vector<double> series_features(Model<float>& model,
                                    const std::vector<WindowSample>& samples,
                                    std::span<const int> idx) {
  const int r = model.config().n_rois;
  const int w = model.config().window;
  const std::size_t dim = static_cast<std::size_t>(r) * static_cast<std::size_t>(w);
  std::vector<double> out(idx.size() * dim);
  for (std::size_t start = 0; start < idx.size(); start += kEvalChunk) {
    const auto n = std::min<std::size_t>(kEvalChunk, idx.size() - start);
    const auto batch = gather(samples, idx.subspan(start, n));
    const Mat<float> s =
        model.series(assemble_batch<float>(model.config(), batch), Phase::kEval);
    const auto b = static_cast<Eigen::Index>(n);
    for (Eigen::Index j = 0; j < b; ++j) {
      double* row = out.data() + (start + static_cast<std::size_t>(j)) * dim;
      for (int roi = 0; roi < r; ++roi) {
        for (int t = 0; t < w; ++t) row[roi * w + t] = s(roi, t * b + j);
      }
    }
  }
  return out;
}

std::vector<int> predict(Model<float>& model,
                         const std::vector<WindowSample>& samples,
                         std::span<const int> idx) {
  const Mat<float> p = predict_proba(model, samples, idx);
  std::vector<int> out(idx.size());
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    Eigen::Index arg = 0;
    p.col(j).maxCoeff(&arg);
    out[static_cast<std::size_t>(j)] = static_cast<int>(arg);
  }
  return out;
}

TrainResult train(const ModelConfig& model_config, const TrainConfig& config,
                  const std::vector<WindowSample>& samples,
                  std::span<const int> train_idx, std::span<const int> val_idx,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_idx.empty()) throw ValidationError("empty training set");
  for (int i : train_idx) {
    const int label = samples[static_cast<std::size_t>(i)].label;
    if (label < 0 || label >= model_config.n_classes) {
      throw ValidationError("label " + std::to_string(label) +
                            " outside [0, n_classes)");
    }
  }

  Model<float> model(model_config);
  model.init(derive_seed(config.seed, "init"));
  Adam<float> adam(model.params(), {config.learning_rate, config.beta1,
                                    config.beta2, config.epsilon});
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "shuffle"));

  TrainResult result{model, {}, 0, -1.0};
  std::vector<int> order(train_idx.begin(), train_idx.end());
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const auto n = std::min(batch_size, order.size() - start);
      const auto batch =
          gather(samples, std::span<const int>(order).subspan(start, n));
      const auto labels = labels_of(batch);
      model.zero_grad();
      const Mat<float> logits =
          model.forward(assemble_batch<float>(model_config, batch), Phase::kTrain);
      Mat<float> dlogits;
      const double loss = softmax_cross_entropy<float>(logits, labels, &dlogits);
      if (!std::isfinite(loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           " (non-finite loss)");
      }
      model.backward(dlogits);
      adam.step();
      loss_sum += loss * static_cast<double>(n);
      correct += count_correct(logits, labels);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    if (!val_idx.empty()) {
      const EvalStats v = evaluate(model, samples, val_idx);
      rec.val_loss = v.loss;
      rec.val_acc = v.accuracy;
    }
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const double score = val_idx.empty() ? rec.train_acc : rec.val_acc;
    if (score > result.best_val_acc) {
      result.best_val_acc = score;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

void write_curve_csv(const std::vector<EpochRecord>& curve,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(8);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const EpochRecord& r : curve) {
    out << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ','
        << r.val_loss << ',' << r.val_acc << '\n';
  }
}

}  // namespace awats::nn
