#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "awats/errors.hpp"
#include "awats/interpret.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace awats {
namespace {

ContributionMap map_of(int c, int r, std::vector<double> raw) {
  ContributionMap m;
  m.n_classes = c;
  m.n_rois = r;
  m.raw = std::move(raw);
  return m;
}

TEST(Normalize, DividesByLargestPositive) {
  const ContributionMap m = normalize_contributions(map_of(2, 3, {2, 4, -1, 0, 0, 0}));
  EXPECT_EQ(m.normalized, (std::vector<double>{0.5, 1.0, -0.25, 0, 0, 0}));
  EXPECT_EQ(m.flagged, (std::vector<uint8_t>{0, 1}));
  ContributionMap again = m;
  again.raw = m.normalized;
  EXPECT_EQ(normalize_contributions(again).normalized, m.normalized);
  const ContributionMap neg = normalize_contributions(map_of(1, 2, {-1, -3}));
  EXPECT_EQ(neg.normalized, (std::vector<double>{-1, -3}));
  EXPECT_EQ(neg.flagged[0], 1);
}

using test::brute_shapley;

CoalitionValue game(int n, std::function<double(unsigned)> v) {
  return [n, v](std::span<const uint8_t> masks, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      unsigned s = 0;
      for (int i = 0; i < n; ++i) s |= masks[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] ? 1u << i : 0u;
      out[k] = v(s);
    }
  };
}

const std::vector<double> kWeights{0.7, -0.2, 1.5, 0.0, 0.3, -0.9};

double additive(unsigned s) {
  double v = 0.25;
  for (int i = 0; i < 6; ++i)
    if (s & (1u << i)) v += kWeights[static_cast<std::size_t>(i)];
  return v;
}

// Non-additive: pairwise interactions plus a saturating term. Player 3 is a
// dummy; players 4 and 5 are symmetric.
double interacting(unsigned s) {
  auto in = [s](int i) { return (s >> i) & 1u ? 1.0 : 0.0; };
  const double lin = 0.5 * in(0) + 0.8 * in(1) - 0.3 * in(2) + 0.4 * (in(4) + in(5));
  return std::tanh(lin) + 0.6 * in(0) * in(2) - 0.2 * in(1) * in(4) - 0.2 * in(1) * in(5);
}

TEST(Shapley, AdditiveGameRecoversWeights) {
  const ShapleyValues ex = shapley_exact(6, game(6, additive));
  const ShapleyValues mc = shapley_permutation(6, 50, 1, 0, game(6, additive));
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(ex.phi[static_cast<std::size_t>(i)], kWeights[static_cast<std::size_t>(i)], 1e-12);
    EXPECT_NEAR(mc.phi[static_cast<std::size_t>(i)], kWeights[static_cast<std::size_t>(i)], 1e-12);
  }
  EXPECT_DOUBLE_EQ(ex.v_empty, 0.25);
}

TEST(Shapley, ExactMatchesDefinition) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> table(1u << 7);
  for (double& t : table) t = u(rng);
  auto v = [&](unsigned s) { return table[s]; };
  const auto ref = brute_shapley(7, v);
  for (int batch : {1, 7, 1024}) {
    const ShapleyValues ex = shapley_exact(7, game(7, v), batch);
    for (int i = 0; i < 7; ++i) EXPECT_NEAR(ex.phi[static_cast<std::size_t>(i)], ref[static_cast<std::size_t>(i)], 1e-12);
  }
}

TEST(Shapley, EfficiencySymmetryDummy) {
  const ShapleyValues ex = shapley_exact(6, game(6, interacting));
  const ShapleyValues mc = shapley_permutation(6, 40, 2, 3, game(6, interacting));
  for (const ShapleyValues* s : {&ex, &mc}) {
    const double total = std::accumulate(s->phi.begin(), s->phi.end(), 0.0);
    EXPECT_NEAR(total, s->v_full - s->v_empty, 1e-12);
    EXPECT_EQ(s->phi[3], 0.0);
  }
  EXPECT_NEAR(ex.phi[4], ex.phi[5], 1e-14);
}

TEST(Shapley, MonteCarloWithinThreeStandardErrors) {
  const ShapleyValues ex = shapley_exact(6, game(6, interacting));
  const ShapleyValues mc = shapley_permutation(6, 400, 9, 0, game(6, interacting));
  for (int i = 0; i < 6; ++i) {
    const auto k = static_cast<std::size_t>(i);
    EXPECT_LE(std::abs(mc.phi[k] - ex.phi[k]), 3.0 * mc.std_error[k] + 1e-12) << i;
  }
}

TEST(Shapley, StandardErrorShrinksAsRootN) {
  const ShapleyValues a = shapley_permutation(6, 64, 4, 0, game(6, interacting));
  const ShapleyValues b = shapley_permutation(6, 1024, 4, 0, game(6, interacting));
  for (int i : {0, 1, 2}) {
    const double ratio = a.std_error[static_cast<std::size_t>(i)] / b.std_error[static_cast<std::size_t>(i)];
    EXPECT_NEAR(ratio, 4.0, 1.0) << i;
  }
}

TEST(Shapley, PermutationEstimateIsDeterministicPerStream) {
  const auto a = shapley_permutation(6, 20, 4, 17, game(6, interacting), 5);
  const auto b = shapley_permutation(6, 20, 4, 17, game(6, interacting), 1024);
  EXPECT_EQ(a.phi, b.phi);
  const auto c = shapley_permutation(6, 20, 4, 18, game(6, interacting));
  EXPECT_NE(a.phi, c.phi);
}

std::vector<WindowSample> ats_samples(int n, int r, int w, int classes, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<WindowSample> out;
  for (int i = 0; i < n; ++i) {
    WindowSample s;
    s.n_rois = r;
    s.window = w;
    s.label = i % classes;
    s.features.resize(static_cast<std::size_t>(r * w));
    for (double& v : s.features) v = g(rng);
    out.push_back(std::move(s));
  }
  return out;
}

nn::Model<float> small_model(int r, int w, int classes, uint64_t seed) {
  nn::ModelConfig c;
  c.mode = nn::InputMode::kAts;
  c.n_rois = r;
  c.window = w;
  c.n_classes = classes;
  c.conv_filters = 6;
  c.conv_layers = 1;
  c.lstm_hidden = 6;
  c.lstm_layers = 1;
  c.head_hidden = 6;
  nn::Model<float> m(c);
  m.init(seed);
  return m;
}

TEST(DecoderAttribution, DisconnectedRoiGetsZero) {
  const auto data = ats_samples(12, 6, 5, 3, 1);
  auto model = small_model(6, 5, 3, 2);
  auto& w = model.convs()[0].weight().value;
  for (int k = 0; k < 3; ++k) w.col(k * 6 + 2).setZero();  // ROI 2 in every tap
  std::vector<int> idx(12);
  std::iota(idx.begin(), idx.end(), 0);
  ShapleyConfig cfg;
  std::vector<ShapleyValues> per;
  const ContributionMap m = shapley_contributions(model, data, idx, cfg, &per);
  EXPECT_TRUE(m.exact);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(m.raw_at(c, 2), 0.0);
  for (const ShapleyValues& s : per) {
    const double total = std::accumulate(s.phi.begin(), s.phi.end(), 0.0);
    EXPECT_NEAR(total, s.v_full - s.v_empty, 1e-6);
  }
  EXPECT_EQ(m.class_counts, (std::vector<int>{4, 4, 4}));
}

TEST(DecoderAttribution, ConstantModelGivesZero) {
  const auto data = ats_samples(6, 4, 5, 2, 3);
  auto model = small_model(4, 5, 2, 4);
  for (auto* p : model.params()) p->value.setZero();
  std::vector<int> idx{0, 1, 2, 3, 4, 5};
  ShapleyConfig cfg;
  cfg.method = ShapleyMethod::kMonteCarlo;
  cfg.n_sims = 8;
  const ContributionMap m = shapley_contributions(model, data, idx, cfg);
  for (double v : m.raw) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(m.flagged, (std::vector<uint8_t>{1, 1}));
}

TEST(DecoderAttribution, BaselineIsPerRoiMean) {
  auto data = ats_samples(4, 2, 3, 2, 5);
  const auto base = compute_baseline(data, BaselineKind::kDatasetMean);
  ASSERT_EQ(base.size(), 6u);
  for (int r = 0; r < 2; ++r) {
    double mean = 0.0;
    for (const auto& s : data)
      for (int t = 0; t < 3; ++t) mean += s.features[static_cast<std::size_t>(r * 3 + t)] / 12.0;
    for (int t = 0; t < 3; ++t) EXPECT_NEAR(base[static_cast<std::size_t>(r * 3 + t)], mean, 1e-12);
  }
  for (double v : compute_baseline(data, BaselineKind::kZeros)) EXPECT_EQ(v, 0.0);
}

Eigen::MatrixXd features_two_class(int n, std::vector<int>& labels, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, 3);
  labels.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    labels[static_cast<std::size_t>(i)] = y;
    x(i, 0) = g(rng) + (y ? 1.0 : -1.0);
    x(i, 1) = g(rng);
    x(i, 2) = g(rng) - (y ? 0.5 : -0.5);
  }
  return x;
}

TEST(Logistic, SignsShrinkageAndConvexity) {
  std::vector<int> y;
  const Eigen::MatrixXd x = features_two_class(200, y, 1);
  LogisticConfig a;
  a.l2 = 0.1;
  const LogisticFit fa = fit_logistic(x, y, 2, a);
  EXPECT_TRUE(fa.converged);
  const Eigen::VectorXd contrast = fa.weights.row(1) - fa.weights.row(0);
  EXPECT_GT(contrast(0), 0.5);
  EXPECT_LT(contrast(2), -0.2);
  EXPECT_LT(std::abs(contrast(1)), std::abs(contrast(0)));

  LogisticConfig b = a;
  b.init_seed = 77;
  const LogisticFit fb = fit_logistic(x, y, 2, b);
  EXPECT_LT((fa.weights - fb.weights).cwiseAbs().maxCoeff(), 1e-4);
  // The unpenalised bias is identified only up to a shared offset.
  EXPECT_NEAR(fa.bias(1) - fa.bias(0), fb.bias(1) - fb.bias(0), 1e-4);

  LogisticConfig strong = a;
  strong.l2 = 5.0;
  EXPECT_LT(fit_logistic(x, y, 2, strong).weights.norm(), fa.weights.norm());

  // Stationarity: W = -(1/l2) * mean gradient of the data term.
  Eigen::MatrixXd logits = (x * fa.weights.transpose()).rowwise() + fa.bias.transpose();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(2, 3);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd p = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
    p /= p.sum();
    p(y[static_cast<std::size_t>(i)]) -= 1.0;
    grad += p * x.row(i) / 200.0;
  }
  EXPECT_LT((grad + a.l2 * fa.weights).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Logistic, SharedFeatureShrinksAndSeparatedFeatureHasSign) {
  std::vector<int> y;
  Eigen::MatrixXd x = features_two_class(200, y, 4);
  // Column 1 carries the same value for every sample of every class.
  x.col(1).setConstant(0.7);
  LogisticConfig cfg;
  cfg.l2 = 1.0;
  const LogisticFit fit = fit_logistic(x, y, 2, cfg);
  EXPECT_LT(std::abs(fit.weights(0, 1)), 1e-3);
  EXPECT_LT(std::abs(fit.weights(1, 1)), 1e-3);

  Eigen::MatrixXd one(20, 1);
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    one(i, 0) = i < 10 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
    labels.push_back(i < 10 ? 0 : 1);
  }
  const LogisticFit sep = fit_logistic(one, labels, 2, LogisticConfig{});
  EXPECT_GT(sep.weights(1, 0), 0.0);
  EXPECT_LT(sep.weights(0, 0), 0.0);
}

TEST(ShapleyConfig, DefaultsToSixtyFourPermutations) {
  EXPECT_EQ(ShapleyConfig{}.n_sims, 64);
  EXPECT_EQ(parse_shapley_method("mc"), ShapleyMethod::kMonteCarlo);
  EXPECT_EQ(parse_baseline("zeros"), BaselineKind::kZeros);
  EXPECT_THROW(parse_baseline("median"), ConfigError);
}

TEST(Logistic, RoiScoresAverageWindowCoefficients) {
  auto data = ats_samples(60, 3, 4, 2, 8);
  for (auto& s : data)
    for (int t = 0; t < 4; ++t) s.features[static_cast<std::size_t>(t)] += s.label ? 1.5 : -1.5;
  std::vector<int> idx(60);
  std::iota(idx.begin(), idx.end(), 0);
  LogisticFit fit;
  const ContributionMap m = logistic_contributions(data, idx, 2, LogisticConfig{}, &fit);
  EXPECT_EQ(m.method, "logistic");
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(m.raw_at(c, r), fit.weights.row(c).segment(r * 4, 4).mean(), 1e-12);
  EXPECT_GT(m.raw_at(1, 0), m.raw_at(1, 1));
  EXPECT_EQ(m.normalized_at(1, 0), 1.0);
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

TEST(Networks, MeansOverMembers) {
  test::TempDir dir;
  write_text(dir / "n.csv", "roi_id,network_id,name\n1,1,visual\n2,2,motor\n3,1,visual\n4,2,motor\n5,2,motor\n");
  const NetworkMap nets = read_network_map(dir / "n.csv", 5);
  EXPECT_EQ(nets.n_networks(), 2);
  EXPECT_EQ(nets.names[1], "motor");
  ContributionMap m = map_of(1, 5, {1, 0, 3, 0, 6});
  m.normalized = m.raw;
  EXPECT_EQ(network_aggregate(m, nets), (std::vector<double>{2.0, 2.0}));

  // Relabelling ROIs together with their assignment changes nothing.
  NetworkMap perm;
  perm.names = nets.names;
  perm.assignment = {2, 1, 2, 1, 2};
  ContributionMap pm = map_of(1, 5, {0, 1, 6, 3, 0});
  pm.normalized = pm.raw;
  EXPECT_EQ(network_aggregate(pm, perm), (std::vector<double>{2.0, 2.0}));

  NetworkMap one;
  one.names = {"all"};
  one.assignment.assign(5, 1);
  EXPECT_EQ(network_aggregate(m, one), (std::vector<double>{2.0}));
}

TEST(Networks, UnmappedRoiAndEmptyNetwork) {
  test::TempDir dir;
  write_text(dir / "n.csv", "roi_id,network_id,name\n1,1,a\n2,1,a\n");
  EXPECT_THROW(read_network_map(dir / "n.csv", 3), ValidationError);
  NetworkMap nets;
  nets.names = {"a", "b"};
  nets.assignment = {1, 1};
  ContributionMap m = map_of(1, 2, {1, 1});
  m.normalized = m.raw;
  EXPECT_TRUE(std::isnan(network_aggregate(m, nets)[1]));
}

}  // namespace
}  // namespace awats
