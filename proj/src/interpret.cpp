#include "awats/interpret.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "awats/errors.hpp"
#include "awats/neural/layers.hpp"
#include "awats/seed.hpp"

namespace awats {

namespace {

void evaluate_in_batches(int n_players, int max_batch,
                         const std::vector<uint8_t>& masks, std::vector<double>& values,
                         const CoalitionValue& value) {
  const std::size_t n = values.size();
  const auto r = static_cast<std::size_t>(n_players);
  const auto step = static_cast<std::size_t>(std::max(1, max_batch));
  for (std::size_t start = 0; start < n; start += step) {
    const std::size_t count = std::min(step, n - start);
    value(std::span<const uint8_t>(masks.data() + start * r, count * r),
          std::span<double>(values.data() + start, count));
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

const char* to_string(BaselineKind k) {
  return k == BaselineKind::kZeros ? "zeros" : "dataset_mean";
}

BaselineKind parse_baseline(const std::string& s) {
  if (s == "dataset_mean" || s == "mean") return BaselineKind::kDatasetMean;
  if (s == "zeros") return BaselineKind::kZeros;
  throw ConfigError("unknown baseline '" + s + "' (expected dataset_mean or zeros)");
}

ShapleyMethod parse_shapley_method(const std::string& s) {
  if (s == "auto") return ShapleyMethod::kAuto;
  if (s == "mc") return ShapleyMethod::kMonteCarlo;
  if (s == "exact") return ShapleyMethod::kExact;
  throw ConfigError("unknown Shapley method '" + s + "' (expected auto, mc or exact)");
}

void ShapleyConfig::validate() const {
  if (n_sims < 1) throw ConfigError("number of simulations must be >= 1");
  if (max_batch < 1) throw ConfigError("max batch must be >= 1");
}

ContributionMap normalize_contributions(ContributionMap map) {
  const auto r = static_cast<std::size_t>(map.n_rois);
  map.normalized = map.raw;
  map.flagged.assign(static_cast<std::size_t>(map.n_classes), 0);
  for (std::size_t c = 0; c < static_cast<std::size_t>(map.n_classes); ++c) {
    double top = 0.0;
    for (std::size_t i = 0; i < r; ++i) top = std::max(top, map.raw[c * r + i]);
    if (top > 0.0) {
      for (std::size_t i = 0; i < r; ++i) map.normalized[c * r + i] = map.raw[c * r + i] / top;
    } else {
      map.flagged[c] = 1;
    }
  }
  return map;
}

// ---------------------------------------------------------------------------

ShapleyValues shapley_exact(int n_players, const CoalitionValue& value, int max_batch) {
  if (n_players < 1 || n_players > 20) {
    throw ConfigError("exact Shapley enumeration supports 1..20 players");
  }
  const auto r = static_cast<std::size_t>(n_players);
  const std::size_t n_masks = std::size_t{1} << r;
  std::vector<uint8_t> masks(n_masks * r);
  for (std::size_t m = 0; m < n_masks; ++m) {
    for (std::size_t i = 0; i < r; ++i) masks[m * r + i] = (m >> i) & 1U;
  }
  std::vector<double> v(n_masks);
  evaluate_in_batches(n_players, max_batch, masks, v, value);

  // weight[s] = s! (R - s - 1)! / R!
  std::vector<double> weight(r);
  for (std::size_t s = 0; s < r; ++s) {
    weight[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                         std::lgamma(static_cast<double>(r - s)) -
                         std::lgamma(static_cast<double>(r) + 1.0));
  }
  ShapleyValues out;
  out.phi.assign(r, 0.0);
  out.std_error.assign(r, 0.0);
  for (std::size_t m = 0; m < n_masks; ++m) {
    const auto size = static_cast<std::size_t>(std::popcount(m));
    for (std::size_t i = 0; i < r; ++i) {
      if ((m >> i) & 1U) continue;
      out.phi[i] += weight[size] * (v[m | (std::size_t{1} << i)] - v[m]);
    }
  }
  out.v_empty = v[0];
  out.v_full = v[n_masks - 1];
  return out;
}

ShapleyValues shapley_permutation(int n_players, int n_sims, uint64_t seed,
                                  uint64_t stream, const CoalitionValue& value,
                                  int max_batch) {
  if (n_players < 1) throw ConfigError("Shapley needs at least one player");
  if (n_sims < 1) throw ConfigError("number of simulations must be >= 1");
  const auto r = static_cast<std::size_t>(n_players);
  const auto sims = static_cast<std::size_t>(n_sims);

  // Row 0 is the empty coalition, row 1 the full one; then for each
  // permutation its R - 1 proper nonempty prefixes.
  std::vector<std::vector<int>> perms(sims);
  std::vector<uint8_t> masks((2 + sims * (r - 1)) * r, 0);
  std::fill(masks.begin() + static_cast<std::ptrdiff_t>(r),
            masks.begin() + static_cast<std::ptrdiff_t>(2 * r), 1);
  for (std::size_t p = 0; p < sims; ++p) {
    std::vector<int>& perm = perms[p];
    perm.resize(r);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, stream, p));
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 1; k < r; ++k) {
      uint8_t* row = masks.data() + (2 + p * (r - 1) + (k - 1)) * r;
      for (std::size_t j = 0; j < k; ++j) row[static_cast<std::size_t>(perm[j])] = 1;
    }
  }
  std::vector<double> v(masks.size() / r);
  evaluate_in_batches(n_players, max_batch, masks, v, value);

  const auto prefix_value = [&](std::size_t p, std::size_t k) {
    if (k == 0) return v[0];
    if (k == r) return v[1];
    return v[2 + p * (r - 1) + (k - 1)];
  };
  std::vector<double> sum(r, 0.0), sq(r, 0.0);
  for (std::size_t p = 0; p < sims; ++p) {
    for (std::size_t k = 0; k < r; ++k) {
      const double d = prefix_value(p, k + 1) - prefix_value(p, k);
      const auto i = static_cast<std::size_t>(perms[p][k]);
      sum[i] += d;
      sq[i] += d * d;
    }
  }
  ShapleyValues out;
  out.phi.resize(r);
  out.std_error.resize(r);
  const auto n = static_cast<double>(sims);
  for (std::size_t i = 0; i < r; ++i) {
    out.phi[i] = sum[i] / n;
    const double var = sims > 1 ? std::max(0.0, (sq[i] - sum[i] * sum[i] / n) / (n - 1)) : 0.0;
    out.std_error[i] = std::sqrt(var / n);
  }
  out.v_empty = v[0];
  out.v_full = v[1];
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> compute_baseline(const std::vector<WindowSample>& samples,
                                     BaselineKind kind) {
  if (samples.empty()) throw ValidationError("baseline needs at least one sample");
  const WindowSample& first = samples.front();
  const auto r = static_cast<std::size_t>(first.n_rois);
  const auto w = static_cast<std::size_t>(first.window);
  const auto width = static_cast<std::size_t>(first.repr_width);
  std::vector<double> base(r * w * width, 0.0);
  if (kind == BaselineKind::kZeros) return base;

  std::vector<double> mean(r * width, 0.0);
  for (const WindowSample& s : samples) {
    if (s.n_rois != first.n_rois || s.window != first.window ||
        s.repr_width != first.repr_width || s.layout != first.layout) {
      throw DimensionError("samples differ in shape");
    }
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t t = 0; t < w; ++t) {
        for (std::size_t k = 0; k < width; ++k) {
          mean[i * width + k] += s.features[(i * w + t) * width + k];
        }
      }
    }
  }
  const double n = static_cast<double>(samples.size() * w);
  for (double& m : mean) m /= n;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t t = 0; t < w; ++t) {
      for (std::size_t k = 0; k < width; ++k) {
        base[(i * w + t) * width + k] = mean[i * width + k];
      }
    }
  }
  return base;
}

DecoderGame::DecoderGame(nn::Model<float>& model, const WindowSample& sample,
                         std::span<const double> baseline)
    : model_(model), sample_(sample), baseline_(baseline) {
  if (baseline.size() != sample.features.size()) {
    throw DimensionError("baseline does not match the sample shape");
  }
  if (sample.label < 0 || sample.label >= model.config().n_classes) {
    throw ValidationError("sample label outside the model's classes");
  }
}

void DecoderGame::operator()(std::span<const uint8_t> masks, std::span<double> out) {
  const nn::ModelConfig& cfg = model_.config();
  const int r = cfg.n_rois;
  const int w = cfg.window;
  const auto b = static_cast<Eigen::Index>(out.size());
  nn::BatchInput<float> in;
  in.batch = static_cast<int>(b);
  const double* present = sample_.features.data();
  const double* absent = baseline_.data();
  if (cfg.mode == nn::InputMode::kAwats) {
    const int width = cfg.repr_width();
    if (sample_.layout != FeatureLayout::kRepr || sample_.n_rois != r ||
        sample_.window != w || sample_.repr_width != width) {
      throw DimensionError("sample shape does not match AWATS model");
    }
    in.data.resize(width, static_cast<Eigen::Index>(w) * b * r);
    for (Eigen::Index s = 0; s < b; ++s) {
      const uint8_t* mask = masks.data() + s * r;
      for (int roi = 0; roi < r; ++roi) {
        const double* src = mask[roi] ? present : absent;
        for (int t = 0; t < w; ++t) {
          const double* v = src + (static_cast<std::size_t>(roi) * w + t) * width;
          const Eigen::Index col = (t * b + s) * r + roi;
          for (int k = 0; k < width; ++k) in.data(k, col) = static_cast<float>(v[k]);
        }
      }
    }
  } else {
    if (sample_.layout != FeatureLayout::kSeries || sample_.n_rois != r ||
        sample_.window != w) {
      throw DimensionError("sample shape does not match ATS model");
    }
    in.data.resize(r, static_cast<Eigen::Index>(w) * b);
    for (Eigen::Index s = 0; s < b; ++s) {
      const uint8_t* mask = masks.data() + s * r;
      for (int roi = 0; roi < r; ++roi) {
        const double* src = (mask[roi] ? present : absent) + static_cast<std::size_t>(roi) * w;
        for (int t = 0; t < w; ++t) in.data(roi, t * b + s) = static_cast<float>(src[t]);
      }
    }
  }
  const nn::Mat<float> p = nn::softmax<float>(model_.forward(in, nn::Phase::kEval));
  for (Eigen::Index s = 0; s < b; ++s) {
    out[static_cast<std::size_t>(s)] = static_cast<double>(p(sample_.label, s));
  }
}

ContributionMap shapley_contributions(nn::Model<float>& model,
                                      const std::vector<WindowSample>& samples,
                                      std::span<const int> idx,
                                      const ShapleyConfig& config,
                                      std::vector<ShapleyValues>* per_sample) {
  config.validate();
  if (idx.empty()) throw ValidationError("no samples to attribute");
  const nn::ModelConfig& cfg = model.config();
  const int r = cfg.n_rois;
  const int c = cfg.n_classes;
  const bool exact = config.method == ShapleyMethod::kExact ||
                     (config.method == ShapleyMethod::kAuto && r <= kExactMaxRois);
  const std::vector<double> baseline = compute_baseline(samples, config.baseline);

  std::vector<ShapleyValues> results(idx.size());
  std::exception_ptr failure;
#pragma omp parallel
  {
    // Forward passes cache activations, so each thread needs its own model.
    nn::Model<float> local = model;
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(idx.size()); ++i) {
      try {
        const int s = idx[static_cast<std::size_t>(i)];
        DecoderGame game(local, samples.at(static_cast<std::size_t>(s)), baseline);
        const CoalitionValue value = std::ref(game);
        results[static_cast<std::size_t>(i)] =
            exact ? shapley_exact(r, value, config.max_batch)
                  : shapley_permutation(r, config.n_sims, config.seed,
                                        static_cast<uint64_t>(s), value,
                                        config.max_batch);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  ContributionMap map;
  map.n_classes = c;
  map.n_rois = r;
  map.raw.assign(static_cast<std::size_t>(c * r), 0.0);
  map.std_error.assign(static_cast<std::size_t>(c * r), 0.0);
  map.class_counts.assign(static_cast<std::size_t>(c), 0);
  map.n_simulations = config.n_sims;
  map.exact = exact;
  map.baseline_kind = config.baseline;
  map.method = "shapley";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int label = samples[static_cast<std::size_t>(idx[i])].label;
    ++map.class_counts[static_cast<std::size_t>(label)];
    for (int k = 0; k < r; ++k) {
      const auto at = static_cast<std::size_t>(label * r + k);
      map.raw[at] += results[i].phi[static_cast<std::size_t>(k)];
      const double se = results[i].std_error[static_cast<std::size_t>(k)];
      map.std_error[at] += se * se;
    }
  }
  for (int cls = 0; cls < c; ++cls) {
    const int n = map.class_counts[static_cast<std::size_t>(cls)];
    if (n == 0) continue;
    for (int k = 0; k < r; ++k) {
      const auto at = static_cast<std::size_t>(cls * r + k);
      map.raw[at] /= n;
      map.std_error[at] = std::sqrt(map.std_error[at]) / n;
    }
  }
  if (per_sample) *per_sample = std::move(results);
  return normalize_contributions(std::move(map));
}

// ---------------------------------------------------------------------------

LogisticFit fit_logistic(const Eigen::MatrixXd& x, std::span<const int> labels,
                         int n_classes, const LogisticConfig& config) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n == 0) throw ValidationError("logistic regression needs samples");
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DimensionError("label count does not match rows");
  }
  if (n_classes < 2) throw ConfigError("logistic regression needs >= 2 classes");
  if (config.l2 < 0.0) throw ConfigError("L2 strength must be non-negative");
  if (config.max_iterations < 1) throw ConfigError("max iterations must be >= 1");

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_classes, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l < 0 || l >= n_classes) throw ValidationError("label outside [0, n_classes)");
    y(l, i) = 1.0;
  }

  // Step 1/L with L bounding the Hessian: 0.5 * lambda_max([x 1]^T [x 1]) / n
  // + l2. The power-iteration estimate is padded since it approaches from below.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(d + 1) / std::sqrt(static_cast<double>(d + 1));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd xv = x * v.head(d) + Eigen::VectorXd::Constant(n, v(d));
    Eigen::VectorXd next(d + 1);
    next.head(d) = x.transpose() * xv;
    next(d) = xv.sum();
    const double nn = next.norm();
    if (nn == 0.0) break;
    const double prev = lambda;
    lambda = nn;
    v = next / nn;
    if (std::abs(lambda - prev) <= 1e-9 * lambda) break;
  }
  const double lipschitz = 0.5 * 1.05 * lambda / static_cast<double>(n) + config.l2;
  const double lr = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  LogisticFit fit;
  fit.weights = Eigen::MatrixXd::Zero(n_classes, d);
  fit.bias = Eigen::VectorXd::Zero(n_classes);
  if (config.init_seed != 0) {
    std::mt19937_64 rng(config.init_seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < fit.weights.size(); ++i) fit.weights.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < fit.bias.size(); ++i) fit.bias(i) = u(rng);
  }
  const Eigen::MatrixXd xt = x.transpose();
  for (int it = 0; it < config.max_iterations; ++it) {
    Eigen::MatrixXd logits = fit.weights * xt;
    logits.colwise() += fit.bias;
    const Eigen::RowVectorXd mx = logits.colwise().maxCoeff();
    logits.rowwise() -= mx;
    Eigen::MatrixXd p = logits.array().exp().matrix();
    p.array().rowwise() /= p.colwise().sum().array();
    const Eigen::MatrixXd g = (p - y) / static_cast<double>(n);
    const Eigen::MatrixXd gw = g * x + config.l2 * fit.weights;
    const Eigen::VectorXd gb = g.rowwise().sum();
    fit.grad_norm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
    fit.iterations = it;
    if (!std::isfinite(fit.grad_norm)) throw NumericError("logistic regression diverged");
    if (fit.grad_norm < config.tolerance) {
      fit.converged = true;
      return fit;
    }
    fit.weights -= lr * gw;
    fit.bias -= lr * gb;
  }
  fit.iterations = config.max_iterations;
  return fit;
}

ContributionMap logistic_contributions(const std::vector<WindowSample>& samples,
                                       std::span<const int> idx, int n_classes,
                                       const LogisticConfig& config, LogisticFit* fit_out) {
  if (idx.empty()) throw ValidationError("no samples for logistic regression");
  const WindowSample& first = samples.at(static_cast<std::size_t>(idx[0]));
  if (first.layout != FeatureLayout::kSeries) {
    throw ValidationError("logistic contributions need R x W series windows");
  }
  const int r = first.n_rois;
  const int w = first.window;
  const auto d = static_cast<Eigen::Index>(r) * w;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), d);
  std::vector<int> labels(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const WindowSample& s = samples.at(static_cast<std::size_t>(idx[i]));
    if (s.layout != FeatureLayout::kSeries || s.n_rois != r || s.window != w) {
      throw DimensionError("samples differ in shape");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), j) = s.features[static_cast<std::size_t>(j)];
    }
    labels[i] = s.label;
  }
  LogisticFit fit = fit_logistic(x, labels, n_classes, config);

  ContributionMap map;
  map.n_classes = n_classes;
  map.n_rois = r;
  map.raw.assign(static_cast<std::size_t>(n_classes * r), 0.0);
  map.class_counts.assign(static_cast<std::size_t>(n_classes), 0);
  for (int l : labels) ++map.class_counts[static_cast<std::size_t>(l)];
  map.n_simulations = 1;
  map.exact = true;
  map.method = "logistic";
  for (int c = 0; c < n_classes; ++c) {
    for (int k = 0; k < r; ++k) {
      map.raw[static_cast<std::size_t>(c * r + k)] =
          fit.weights.row(c).segment(static_cast<Eigen::Index>(k) * w, w).mean();
    }
  }
  if (fit_out) *fit_out = std::move(fit);
  return normalize_contributions(std::move(map));
}

// ---------------------------------------------------------------------------

NetworkMap read_network_map(const std::filesystem::path& path, int n_rois) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  NetworkMap nets;
  nets.assignment.assign(static_cast<std::size_t>(n_rois), 0);
  std::vector<std::string> names;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("roi_id", 0) == 0) continue;
    const auto cells = split_csv(line);
    int roi = 0, net = 0;
    try {
      if (cells.size() < 2) throw std::invalid_argument("short row");
      roi = std::stoi(cells[0]);
      net = std::stoi(cells[1]);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected roi_id,network_id,name");
    }
    if (roi < 1 || roi > n_rois) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": ROI " + std::to_string(roi) + " outside 1.." +
                            std::to_string(n_rois));
    }
    if (net < 1) throw ValidationError("network ids start at 1");
    nets.assignment[static_cast<std::size_t>(roi - 1)] = net;
    if (static_cast<std::size_t>(net) > names.size()) names.resize(static_cast<std::size_t>(net));
    if (cells.size() > 2 && names[static_cast<std::size_t>(net - 1)].empty()) {
      names[static_cast<std::size_t>(net - 1)] = cells[2];
    }
  }
  for (std::size_t i = 0; i < nets.assignment.size(); ++i) {
    if (nets.assignment[i] == 0) {
      throw ValidationError("ROI " + std::to_string(i + 1) + " has no network");
    }
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k].empty()) names[k] = "network" + std::to_string(k + 1);
  }
  nets.names = std::move(names);
  return nets;
}

std::vector<double> network_aggregate(const ContributionMap& map, const NetworkMap& nets) {
  if (static_cast<int>(nets.assignment.size()) != map.n_rois) {
    throw ValidationError("network map covers " + std::to_string(nets.assignment.size()) +
                          " ROIs, contributions have " + std::to_string(map.n_rois));
  }
  const int k = nets.n_networks();
  for (std::size_t i = 0; i < nets.assignment.size(); ++i) {
    const int a = nets.assignment[i];
    if (a < 1 || a > k) {
      throw ValidationError("ROI " + std::to_string(i + 1) + " is not mapped to a network");
    }
  }
  std::vector<double> out(static_cast<std::size_t>(map.n_classes * k), 0.0);
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  for (int a : nets.assignment) ++size[static_cast<std::size_t>(a - 1)];
  for (int c = 0; c < map.n_classes; ++c) {
    for (int r = 0; r < map.n_rois; ++r) {
      const int net = nets.assignment[static_cast<std::size_t>(r)] - 1;
      out[static_cast<std::size_t>(c * k + net)] += map.normalized_at(c, r);
    }
    for (int net = 0; net < k; ++net) {
      double& v = out[static_cast<std::size_t>(c * k + net)];
      const int n = size[static_cast<std::size_t>(net)];
      v = n > 0 ? v / n : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

void write_contributions_csv(const ContributionMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "state,roi_id,raw,normalized\n";
  for (int c = 0; c < map.n_classes; ++c) {
    for (int r = 0; r < map.n_rois; ++r) {
      out << c << ',' << r + 1 << ',' << fmt(map.raw_at(c, r)) << ','
          << fmt(map.normalized_at(c, r)) << '\n';
    }
  }
}

void write_roi_values_csv(const ContributionMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "roi_id";
  for (int c = 0; c < map.n_classes; ++c) out << ",state" << c;
  out << '\n';
  for (int r = 0; r < map.n_rois; ++r) {
    out << r + 1;
    for (int c = 0; c < map.n_classes; ++c) out << ',' << fmt(map.normalized_at(c, r));
    out << '\n';
  }
}

void write_network_csv(const std::vector<double>& aggregate, int n_classes,
                       const NetworkMap& nets, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const int k = nets.n_networks();
  out << "state,network,mean_contribution\n";
  for (int c = 0; c < n_classes; ++c) {
    for (int net = 0; net < k; ++net) {
      out << c << ',' << nets.names[static_cast<std::size_t>(net)] << ','
          << fmt(aggregate[static_cast<std::size_t>(c * k + net)]) << '\n';
    }
  }
}

}  // namespace awats
