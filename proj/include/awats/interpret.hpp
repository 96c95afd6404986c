#pragma once

// ROI attribution: Shapley values of a trained decoder, linear-model
// coefficients, and aggregation of ROI scores into networks.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "awats/neural/model.hpp"
#include "awats/windowing.hpp"

namespace awats {

enum class BaselineKind { kDatasetMean, kZeros };

const char* to_string(BaselineKind k);
BaselineKind parse_baseline(const std::string& s);

struct ContributionMap {
  int n_classes = 0;
  int n_rois = 0;
  std::vector<double> raw;         // C x R row-major
  std::vector<double> normalized;  // C x R row-major
  std::vector<double> std_error;   // C x R; empty unless estimated
  std::vector<uint8_t> flagged;    // per class: no positive raw entry
  std::vector<int> class_counts;   // samples averaged per class
  int n_simulations = 0;
  bool exact = false;
  BaselineKind baseline_kind = BaselineKind::kDatasetMean;
  std::string method;  // "shapley" or "logistic"

  double raw_at(int c, int r) const {
    return raw[static_cast<std::size_t>(c) * static_cast<std::size_t>(n_rois) +
               static_cast<std::size_t>(r)];
  }
  double normalized_at(int c, int r) const {
    return normalized[static_cast<std::size_t>(c) * static_cast<std::size_t>(n_rois) +
                      static_cast<std::size_t>(r)];
  }
};

// Divides each class row by its largest positive entry. Rows without a
// positive entry are copied unchanged and flagged.
ContributionMap normalize_contributions(ContributionMap map);

// ---------------------------------------------------------------------------
// Shapley values for a generic coalition game

// Fills out[k] with v(S_k) where S_k is row k of `masks` (out.size() x R,
// nonzero = player present).
using CoalitionValue =
    std::function<void(std::span<const uint8_t> masks, std::span<double> out)>;

struct ShapleyValues {
  std::vector<double> phi;
  std::vector<double> std_error;  // zero in exact mode
  double v_full = 0.0;
  double v_empty = 0.0;
};

// Full enumeration over all 2^R coalitions; R <= 20.
ShapleyValues shapley_exact(int n_players, const CoalitionValue& value,
                            int max_batch = 1024);

// Permutation sampling. Permutation p draws from an RNG seeded with
// derive_seed(seed, stream, p), so estimates do not depend on scheduling.
ShapleyValues shapley_permutation(int n_players, int n_sims, uint64_t seed,
                                  uint64_t stream, const CoalitionValue& value,
                                  int max_batch = 1024);

// ---------------------------------------------------------------------------
// Shapley attribution of a decoder over ROIs

enum class ShapleyMethod { kAuto, kMonteCarlo, kExact };

ShapleyMethod parse_shapley_method(const std::string& s);

constexpr int kDefaultSimulations = 64;
constexpr int kExactMaxRois = 10;

struct ShapleyConfig {
  int n_sims = kDefaultSimulations;
  BaselineKind baseline = BaselineKind::kDatasetMean;
  ShapleyMethod method = ShapleyMethod::kAuto;  // exact when R <= 10
  uint64_t seed = 0;
  int max_batch = 1024;

  void validate() const;
};

// Per-ROI replacement values, R x W x width in sample feature order. The
// dataset mean averages each ROI (and each representation entry) over all
// samples and time points.
std::vector<double> compute_baseline(const std::vector<WindowSample>& samples,
                                     BaselineKind kind);

// v(S) for one sample: softmax probability of its label with ROIs outside S
// replaced by `baseline`. Batches all coalitions of a call into one forward.
class DecoderGame {
 public:
  DecoderGame(nn::Model<float>& model, const WindowSample& sample,
              std::span<const double> baseline);

  void operator()(std::span<const uint8_t> masks, std::span<double> out);

 private:
  nn::Model<float>& model_;
  const WindowSample& sample_;
  std::span<const double> baseline_;
};

// Attribution over samples[idx]; per-class rows average that class's
// samples. `per_sample`, when given, receives each sample's values.
ContributionMap shapley_contributions(nn::Model<float>& model,
                                      const std::vector<WindowSample>& samples,
                                      std::span<const int> idx,
                                      const ShapleyConfig& config,
                                      std::vector<ShapleyValues>* per_sample = nullptr);

// ---------------------------------------------------------------------------
// Multinomial logistic regression

struct LogisticConfig {
  double l2 = 0.01;
  int max_iterations = 50000;
  double tolerance = 1e-6;  // on the gradient norm
  // Random initial weights in [-1, 1] when nonzero; zeros otherwise.
  uint64_t init_seed = 0;
};

struct LogisticFit {
  Eigen::MatrixXd weights;  // C x D
  Eigen::VectorXd bias;     // C
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Full-batch gradient descent on mean cross-entropy + l2/2 * |W|^2 (bias
// unpenalised). `x` is n x D.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, std::span<const int> labels,
                         int n_classes, const LogisticConfig& config);

// Fits on flattened R x W series windows; ROI r's score for class c is the
// mean of its W coefficients in row c.
ContributionMap logistic_contributions(const std::vector<WindowSample>& samples,
                                       std::span<const int> idx, int n_classes,
                                       const LogisticConfig& config,
                                       LogisticFit* fit = nullptr);

// ---------------------------------------------------------------------------
// Networks

struct NetworkMap {
  std::vector<int> assignment;     // ROI index -> network id in 1..K
  std::vector<std::string> names;  // K entries

  int n_networks() const { return static_cast<int>(names.size()); }
};

// CSV with header "roi_id,network_id,name". Every ROI 1..n_rois must appear.
NetworkMap read_network_map(const std::filesystem::path& path, int n_rois);

// C x K row-major means of normalised contributions; NaN for empty networks.
std::vector<double> network_aggregate(const ContributionMap& map,
                                      const NetworkMap& nets);

void write_contributions_csv(const ContributionMap& map,
                             const std::filesystem::path& path);
// One row per ROI: roi_id followed by the normalised score of each class.
void write_roi_values_csv(const ContributionMap& map,
                          const std::filesystem::path& path);
void write_network_csv(const std::vector<double>& aggregate, int n_classes,
                       const NetworkMap& nets, const std::filesystem::path& path);

}  // namespace awats
