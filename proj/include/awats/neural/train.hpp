#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "awats/neural/adam.hpp"
#include "awats/neural/model.hpp"
#include "awats/windowing.hpp"

namespace awats::nn {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 128;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  Model<float> model;
  std::vector<EpochRecord> curve;
  int best_epoch = 0;
  double best_val_acc = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Joint training of extractor and decoder with Adam on mean cross-entropy.
// Returns the parameters from the epoch with the highest validation accuracy
// (first such epoch on ties; training accuracy when `val` is empty).
// Throws NumericError when the loss becomes non-finite.
TrainResult train(const ModelConfig& model_config, const TrainConfig& config,
                  const std::vector<WindowSample>& samples,
                  std::span<const int> train_idx, std::span<const int> val_idx,
                  const EpochCallback& on_epoch = {});

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalStats evaluate(Model<float>& model, const std::vector<WindowSample>& samples,
                   std::span<const int> idx);

// Class probabilities, C x |idx|, evaluated in inference mode.
Mat<float> predict_proba(Model<float>& model,
                         const std::vector<WindowSample>& samples,
                         std::span<const int> idx);

std::vector<int> predict(Model<float>& model,
                         const std::vector<WindowSample>& samples,
                         std::span<const int> idx);

// Regional series the model feeds its decoder, flattened per sample to
// R x W row-major; |idx| x (R*W) row-major overall.
std::vector<double> series_features(Model<float>& model,
                                    const std::vector<WindowSample>& samples,
                                    std::span<const int> idx);

// Derives the model shape (R, W, q, C, mode) from a dataset.
ModelConfig model_config_for(const std::vector<WindowSample>& samples,
                             int n_classes);

void write_curve_csv(const std::vector<EpochRecord>& curve,
                     const std::filesystem::path& path);

}  // namespace awats::nn
