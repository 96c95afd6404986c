#include "awats/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "awats/errors.hpp"
#include "awats/kernels.hpp"
#include "awats/seed.hpp"

namespace awats {

namespace {

int64_t rounded_share(double fraction, int64_t n) {
  return static_cast<int64_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

using Dense = std::vector<double>;  // row-major square matrix

Dense covariance(std::span<const double> m, int64_t rows, int64_t cols,
                 std::vector<double>& mean) {
  mean.assign(static_cast<std::size_t>(cols), 0.0);
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < cols; ++j) mean[static_cast<std::size_t>(j)] += m[static_cast<std::size_t>(i * cols + j)];
  }
  for (double& v : mean) v /= static_cast<double>(rows);
  Dense cov(static_cast<std::size_t>(cols * cols), 0.0);
  std::vector<double> centered(static_cast<std::size_t>(cols));
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < cols; ++j) {
      centered[static_cast<std::size_t>(j)] =
          m[static_cast<std::size_t>(i * cols + j)] - mean[static_cast<std::size_t>(j)];
    }
    for (int64_t a = 0; a < cols; ++a) {
      const double ca = centered[static_cast<std::size_t>(a)];
      for (int64_t b = a; b < cols; ++b) {
        cov[static_cast<std::size_t>(a * cols + b)] += ca * centered[static_cast<std::size_t>(b)];
      }
    }
  }
  const double denom = static_cast<double>(rows - 1);
  for (int64_t a = 0; a < cols; ++a) {
    for (int64_t b = a; b < cols; ++b) {
      const double v = cov[static_cast<std::size_t>(a * cols + b)] / denom;
      cov[static_cast<std::size_t>(a * cols + b)] = v;
      cov[static_cast<std::size_t>(b * cols + a)] = v;
    }
  }
  return cov;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (const auto& u : basis) {
    const double d = dot(v, u);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * u[i];
  }
}

struct PowerResult {
  std::vector<double> vector;
  double eigenvalue = 0.0;
  int iterations = 0;
  bool found = false;
};

// Leading eigenvector of `cov` restricted to the complement of `basis`.
PowerResult power_iteration(const Dense& cov, int64_t n,
                            const std::vector<std::vector<double>>& basis,
                            double scale) {
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 10000;
  PowerResult r;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = 1.0 + 0.1 * static_cast<double>(i);
  orthogonalize(v, basis);
  if (norm(v) < 1e-12) {
    // Start vector lies in the span of `basis`; use the first unit vector
    // that does not.
    for (int64_t k = 0; k < n && norm(v) < 1e-12; ++k) {
      std::fill(v.begin(), v.end(), 0.0);
      v[static_cast<std::size_t>(k)] = 1.0;
      orthogonalize(v, basis);
    }
  }
  double nv = norm(v);
  for (double& x : v) x /= nv;
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int it = 1; it <= kMaxIter; ++it) {
    for (int64_t a = 0; a < n; ++a) {
      double s = 0.0;
      for (int64_t b = 0; b < n; ++b) s += cov[static_cast<std::size_t>(a * n + b)] * v[static_cast<std::size_t>(b)];
      w[static_cast<std::size_t>(a)] = s;
    }
    orthogonalize(w, basis);
    const double nw = norm(w);
    r.iterations = it;
    if (nw <= 1e-14 * scale) {
      r.found = false;
      return r;
    }
    for (double& x : w) x /= nw;
    double diff = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) diff += (w[i] - v[i]) * (w[i] - v[i]);
    v.swap(w);
    r.eigenvalue = nw;
    if (std::sqrt(diff) < kTol) break;
  }
  r.vector = std::move(v);
  r.found = true;
  return r;
}

void fix_sign(std::vector<double>& d) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (std::abs(d[i]) > std::abs(d[arg])) arg = i;
  }
  if (d[arg] < 0.0) {
    for (double& x : d) x = -x;
  }
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

// ---------------------------------------------------------------------------

SplitUnit parse_split_unit(const std::string& s) {
  if (s == "sample") return SplitUnit::kSample;
  if (s == "subject") return SplitUnit::kSubject;
  throw ConfigError("unknown split unit '" + s + "' (expected sample or subject)");
}

void SplitPlan::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0) {
    throw ConfigError("split fractions must be non-negative");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
}

std::vector<Split> make_splits(std::span<const int> labels,
                               std::span<const std::string> subjects,
                               const SplitPlan& plan) {
  plan.validate();
  const auto n = static_cast<int64_t>(labels.size());
  if (n == 0) throw ValidationError("cannot split an empty dataset");
  if (plan.unit == SplitUnit::kSubject &&
      static_cast<int64_t>(subjects.size()) != n) {
    throw ValidationError("subject ids required for every sample");
  }
  const std::set<int> classes(labels.begin(), labels.end());

  std::vector<Split> splits;
  for (int rep = 0; rep < plan.repetitions; ++rep) {
    std::mt19937_64 rng(derive_seed(plan.seed, static_cast<uint64_t>(rep), 0x5917));
    Split s;
    if (plan.unit == SplitUnit::kSample) {
      std::vector<int> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      const int64_t n_train = rounded_share(plan.train, n);
      const int64_t n_val = std::min(rounded_share(plan.val, n), n - n_train);
      s.train.assign(order.begin(), order.begin() + n_train);
      s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
      s.test.assign(order.begin() + n_train + n_val, order.end());
    } else {
      std::vector<std::string> ids(subjects.begin(), subjects.end());
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      std::shuffle(ids.begin(), ids.end(), rng);
      const auto m = static_cast<int64_t>(ids.size());
      const int64_t m_train = rounded_share(plan.train, m);
      const int64_t m_val = std::min(rounded_share(plan.val, m), m - m_train);
      std::map<std::string, int> part;
      for (int64_t i = 0; i < m; ++i) {
        part[ids[static_cast<std::size_t>(i)]] =
            i < m_train ? 0 : (i < m_train + m_val ? 1 : 2);
      }
      for (int64_t i = 0; i < n; ++i) {
        const int p = part[subjects[static_cast<std::size_t>(i)]];
        (p == 0 ? s.train : p == 1 ? s.val : s.test).push_back(static_cast<int>(i));
      }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    if (s.test.empty()) {
      throw ValidationError("too few " +
                            std::string(plan.unit == SplitUnit::kSample ? "samples"
                                                                        : "subjects") +
                            " for a nonempty test split");
    }
    std::set<int> train_classes;
    for (int i : s.train) train_classes.insert(labels[static_cast<std::size_t>(i)]);
    for (int c : classes) {
      if (!train_classes.contains(c)) {
        throw ValidationError("class " + std::to_string(c) +
                              " absent from the training split of repetition " +
                              std::to_string(rep));
      }
    }
    splits.push_back(std::move(s));
  }
  return splits;
}

// ---------------------------------------------------------------------------

MetricsReport compute_metrics(std::span<const int> predictions,
                              std::span<const int> labels, int n_classes) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("predictions and labels differ in length");
  }
  if (labels.empty()) throw DomainError("cannot score an empty prediction set");
  if (n_classes < 1) throw ConfigError("n_classes must be >= 1");
  MetricsReport r;
  const auto c = static_cast<std::size_t>(n_classes);
  r.confusion.assign(c, std::vector<int64_t>(c, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if (y < 0 || y >= n_classes || p < 0 || p >= n_classes) {
      throw ValidationError("class id outside [0, n_classes)");
    }
    ++r.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)];
  }
  int64_t correct = 0;
  int active = 0;
  r.per_class.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    int64_t support = 0, predicted = 0;
    for (std::size_t j = 0; j < c; ++j) {
      support += r.confusion[k][j];
      predicted += r.confusion[j][k];
    }
    const int64_t tp = r.confusion[k][k];
    correct += tp;
    ClassMetrics& m = r.per_class[k];
    m.support = static_cast<int>(support);
    m.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = support > 0 ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    if (support > 0 || predicted > 0) {
      ++active;
      r.precision += m.precision;
      r.recall += m.recall;
      r.f1 += m.f1;
    }
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  r.precision /= active;
  r.recall /= active;
  r.f1 /= active;
  return r;
}

// ---------------------------------------------------------------------------

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0) throw DomainError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DomainError("Welch t-test needs at least two values per sample");
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double va = sample_var(a, ma) / static_cast<double>(a.size());
  const double vb = sample_var(b, mb) / static_cast<double>(b.size());
  TTestResult r;
  if (va == 0.0 && vb == 0.0) {
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    r.df = static_cast<double>(a.size() + b.size() - 2);
    return r;
  }
  const double se2 = va + vb;
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / static_cast<double>(a.size() - 1) +
          vb * vb / static_cast<double>(b.size() - 1));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

// ---------------------------------------------------------------------------

PrincipalComponent pca_first_component(std::span<const double> matrix,
                                       int64_t rows, int64_t cols) {
  if (rows < 2) throw DomainError("PCA needs at least two rows");
  if (cols < 1) throw DomainError("PCA needs at least one column");
  if (static_cast<int64_t>(matrix.size()) != rows * cols) {
    throw DimensionError("PCA matrix size does not match its shape");
  }
  std::vector<double> mean;
  const Dense cov = covariance(matrix, rows, cols, mean);
  PrincipalComponent pc;
  for (int64_t i = 0; i < cols; ++i) pc.total_variance += cov[static_cast<std::size_t>(i * cols + i)];
  pc.scores.assign(static_cast<std::size_t>(rows), 0.0);
  pc.direction.assign(static_cast<std::size_t>(cols), 0.0);
  if (pc.total_variance <= 0.0) {
    pc.degenerate = true;
    return pc;
  }
  PowerResult top = power_iteration(cov, cols, {}, pc.total_variance);
  pc.iterations = top.iterations;
  if (!top.found) {
    pc.degenerate = true;
    return pc;
  }
  fix_sign(top.vector);
  pc.direction = top.vector;
  pc.explained_variance = top.eigenvalue;
  for (int64_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < cols; ++j) {
      s += (matrix[static_cast<std::size_t>(i * cols + j)] - mean[static_cast<std::size_t>(j)]) *
           pc.direction[static_cast<std::size_t>(j)];
    }
    pc.scores[static_cast<std::size_t>(i)] = s;
  }
  return pc;
}

SeriesMatrix extract_awats_pca(const ReprTensor& tensor) {
  SeriesMatrix out;
  out.n_rois = tensor.n_rois;
  out.n_trs = tensor.n_trs;
  out.kind = SeriesKind::kAwatsPca;
  out.values.assign(static_cast<std::size_t>(out.n_rois * out.n_trs), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < tensor.n_rois; ++r) {
    const std::span<const double> rows(tensor.values.data() + tensor.offset(r, 0),
                                       static_cast<std::size_t>(tensor.n_trs * tensor.width()));
    const PrincipalComponent pc = pca_first_component(rows, tensor.n_trs, tensor.width());
    for (int64_t t = 0; t < tensor.n_trs; ++t) {
      out.at(r, t) = pc.scores[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

Embedding2d pca_embed_2d(std::span<const double> points, int64_t n, int dim) {
  if (n < 3) throw DomainError("embedding needs at least three points");
  if (dim < 2) throw DomainError("embedding needs dimension >= 2");
  if (static_cast<int64_t>(points.size()) != n * dim) {
    throw DimensionError("point array size does not match n x dim");
  }
  std::vector<double> mean;
  const Dense cov = covariance(points, n, dim, mean);
  double trace = 0.0;
  for (int i = 0; i < dim; ++i) trace += cov[static_cast<std::size_t>(i * dim + i)];

  Embedding2d e;
  e.d1.assign(static_cast<std::size_t>(dim), 0.0);
  e.d2.assign(static_cast<std::size_t>(dim), 0.0);
  std::vector<std::vector<double>> basis;
  if (trace > 0.0) {
    PowerResult first = power_iteration(cov, dim, basis, trace);
    if (first.found) {
      fix_sign(first.vector);
      e.d1 = first.vector;
      basis.push_back(e.d1);
      PowerResult second = power_iteration(cov, dim, basis, trace);
      // A second direction whose variance is at rounding level is noise.
      if (second.found && second.eigenvalue > 1e-12 * trace) {
        fix_sign(second.vector);
        e.d2 = second.vector;
      } else {
        e.degenerate = true;
      }
    } else {
      e.degenerate = true;
    }
  } else {
    e.degenerate = true;
  }

  e.scores.assign(static_cast<std::size_t>(2 * n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    double s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double c = points[static_cast<std::size_t>(i * dim + j)] - mean[static_cast<std::size_t>(j)];
      s1 += c * e.d1[static_cast<std::size_t>(j)];
      s2 += c * e.d2[static_cast<std::size_t>(j)];
    }
    e.scores[static_cast<std::size_t>(2 * i)] = s1;
    e.scores[static_cast<std::size_t>(2 * i + 1)] = s2;
  }
  e.coords = e.scores;
  for (int axis = 0; axis < 2; ++axis) {
    double m = 0.0;
    for (int64_t i = 0; i < n; ++i) m += e.coords[static_cast<std::size_t>(2 * i + axis)];
    m /= static_cast<double>(n);
    double var = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      double& v = e.coords[static_cast<std::size_t>(2 * i + axis)];
      v -= m;
      var += v * v;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (int64_t i = 0; i < n; ++i) {
      double& v = e.coords[static_cast<std::size_t>(2 * i + axis)];
      v = sd > 0.0 ? v / sd : 0.0;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------

double separability_ratio(std::span<const double> points, int dim,
                          std::span<const int> labels) {
  if (dim < 1) throw DomainError("point dimension must be positive");
  if (points.size() != labels.size() * static_cast<std::size_t>(dim)) {
    throw DimensionError("point array size does not match labels x dim");
  }
  std::map<int, int> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2) throw DomainError("separability needs at least two classes");
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw DomainError("class " + std::to_string(label) + " has fewer than two points");
    }
  }
  const kernels::PairDistanceSums sums = kernels::omp::pair_distances(points, dim, labels);
  const double intra = sums.same_sum / static_cast<double>(sums.same_pairs);
  const double inter = sums.cross_sum / static_cast<double>(sums.cross_pairs);
  if (intra == 0.0) return std::numeric_limits<double>::infinity();
  return inter / intra;
}

// ---------------------------------------------------------------------------

void write_metrics_csv(const std::vector<RepetitionRow>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(8);
  out << "repetition,accuracy,precision,recall,f1\n";
  double sum[4] = {0, 0, 0, 0};
  double sq[4] = {0, 0, 0, 0};
  for (const RepetitionRow& r : rows) {
    const double v[4] = {r.metrics.accuracy, r.metrics.precision, r.metrics.recall,
                         r.metrics.f1};
    out << r.repetition;
    for (int k = 0; k < 4; ++k) {
      out << ',' << v[k];
      sum[k] += v[k];
      sq[k] += v[k] * v[k];
    }
    out << '\n';
  }
  const auto n = static_cast<double>(rows.size());
  out << "mean";
  for (int k = 0; k < 4; ++k) out << ',' << (n > 0 ? sum[k] / n : 0.0);
  out << "\nstd";
  for (int k = 0; k < 4; ++k) {
    const double var = n > 1 ? (sq[k] - sum[k] * sum[k] / n) / (n - 1) : 0.0;
    out << ',' << std::sqrt(std::max(0.0, var));
  }
  out << '\n';
}

void write_embedding_csv(const Embedding2d& e, std::span<const std::string> subjects,
                         std::span<const int> labels,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(9);
  out << "x,y,subject_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << e.coords[2 * i] << ',' << e.coords[2 * i + 1] << ','
        << (i < subjects.size() ? subjects[i] : std::string()) << ',' << labels[i]
        << '\n';
  }
}

void write_series_csv(const SeriesMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(9);
  out << "roi_id";
  for (int64_t t = 0; t < m.n_trs; ++t) out << ',' << t;
  out << '\n';
  for (int r = 0; r < m.n_rois; ++r) {
    out << r + 1;
    for (int64_t t = 0; t < m.n_trs; ++t) out << ',' << m.at(r, t);
    out << '\n';
  }
}

}  // namespace awats
