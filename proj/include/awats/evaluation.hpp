#pragma once

// Experiment protocol and the statistics used to compare extraction methods.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "awats/parcellation.hpp"
#include "awats/resampling.hpp"

namespace awats {

// ---------------------------------------------------------------------------
// Repeated random splits

enum class SplitUnit { kSample, kSubject };

SplitUnit parse_split_unit(const std::string& s);

struct SplitPlan {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  int repetitions = 10;
  uint64_t seed = 0;
  SplitUnit unit = SplitUnit::kSample;

  void validate() const;
};

struct Split {
  std::vector<int> train, val, test;
};

// One disjoint, exhaustive partition per repetition. `subjects` is only
// consulted in subject mode. Throws ValidationError when a class present in
// the data is missing from a training split, or a test split is empty.
std::vector<Split> make_splits(std::span<const int> labels,
                               std::span<const std::string> subjects,
                               const SplitPlan& plan);

// ---------------------------------------------------------------------------
// Classification metrics

struct ClassMetrics {
  int support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  // Macro averages over classes that occur in the labels or predictions.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  // confusion[true][predicted]
  std::vector<std::vector<int64_t>> confusion;
};

MetricsReport compute_metrics(std::span<const int> predictions,
                              std::span<const int> labels, int n_classes);

// ---------------------------------------------------------------------------
// Welch's unequal-variance t-test

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

// Regularised incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

// ---------------------------------------------------------------------------
// PCA

struct PrincipalComponent {
  std::vector<double> scores;     // one per row
  std::vector<double> direction;  // unit vector, largest |loading| positive
  double explained_variance = 0.0;
  double total_variance = 0.0;
  bool degenerate = false;  // zero-variance input
  int iterations = 0;
};

// `matrix` is rows x cols row-major; requires rows >= 2.
PrincipalComponent pca_first_component(std::span<const double> matrix,
                                       int64_t rows, int64_t cols);

// First-component series per ROI from the representation tensor.
SeriesMatrix extract_awats_pca(const ReprTensor& tensor);

struct Embedding2d {
  // Normalised coordinates (mean 0, std 1 per axis), n x 2 row-major.
  std::vector<double> coords;
  // Raw projections onto the two leading directions, n x 2 row-major.
  std::vector<double> scores;
  std::vector<double> d1, d2;
  bool degenerate = false;  // rank < 2
};

Embedding2d pca_embed_2d(std::span<const double> points, int64_t n, int dim);

// ---------------------------------------------------------------------------
// Separability

// Mean cross-class pairwise Euclidean distance over mean same-class pairwise
// distance. `points` is n x dim row-major. Returns +inf when every
// same-class pair coincides.
double separability_ratio(std::span<const double> points, int dim,
                          std::span<const int> labels);

// ---------------------------------------------------------------------------
// CSV export

struct RepetitionRow {
  int repetition = 0;
  MetricsReport metrics;
};

// One row per repetition plus mean and std summary rows.
void write_metrics_csv(const std::vector<RepetitionRow>& rows,
                       const std::filesystem::path& path);

void write_embedding_csv(const Embedding2d& e,
                         std::span<const std::string> subjects,
                         std::span<const int> labels,
                         const std::filesystem::path& path);

void write_series_csv(const SeriesMatrix& m, const std::filesystem::path& path);

}  // namespace awats
