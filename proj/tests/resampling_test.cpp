#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "awats/errors.hpp"
#include "awats/kernels.hpp"
#include "awats/resampling.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace awats {
namespace {

using test::oracle_resample;

TEST(Resample, IntegerPositionsSelectElements) {
  EXPECT_EQ(resample_vector(std::vector<double>{1, 2, 3, 4, 5, 6}, 3),
            (std::vector<double>{2, 4, 6}));
}

TEST(Resample, HandEvaluatedFractions) {
  const auto r = resample_vector(std::vector<double>{0, 3, 6, 9}, 3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 5.0);
  EXPECT_DOUBLE_EQ(r[2], 9.0);
}

TEST(Resample, SinglePoint) {
  for (int q : {1, 2, 7, 10}) {
    EXPECT_EQ(resample_vector(std::vector<double>{7}, q), std::vector<double>(static_cast<std::size_t>(q), 7.0));
  }
}

TEST(Resample, UpsamplingClampsNeighbours) {
  // p = 2, q = 5: positions 0.4, 0.8, 1.2, 1.6, 2.0.
  const auto r = resample_vector(std::vector<double>{10, 20}, 5);
  EXPECT_EQ(r, oracle_resample({10, 20}, 5));
  EXPECT_DOUBLE_EQ(r[0], 10.0);
  EXPECT_DOUBLE_EQ(r[2], 12.0);
  EXPECT_DOUBLE_EQ(r[4], 20.0);
}

TEST(Resample, EmptyInputIsDomainError) {
  EXPECT_THROW(resample_vector(std::vector<double>{}, 3), DomainError);
}

TEST(Resample, PropertiesOnRandomVectors) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(1, 40), qd(2, 20);
  std::normal_distribution<double> g(0.0, 5.0);
  std::uniform_real_distribution<double> ab(-3.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int p = len(rng);
    const int q = qd(rng);
    std::vector<double> v(static_cast<std::size_t>(p));
    for (double& x : v) x = g(rng);
    const auto r = resample_vector(v, q);
    ASSERT_EQ(r.size(), static_cast<std::size_t>(q));

    const auto ref = oracle_resample(v, q);
    for (int i = 0; i < q; ++i) EXPECT_NEAR(r[static_cast<std::size_t>(i)], ref[static_cast<std::size_t>(i)], 1e-12);

    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    for (double x : r) {
      EXPECT_GE(x, *lo - 1e-12);
      EXPECT_LE(x, *hi + 1e-12);
    }

    const double a = ab(rng), b = ab(rng);
    std::vector<double> w = v;
    for (double& x : w) x = a * x + b;
    const auto rw = resample_vector(w, q);
    for (int i = 0; i < q; ++i) {
      EXPECT_NEAR(rw[static_cast<std::size_t>(i)], a * r[static_cast<std::size_t>(i)] + b, 1e-9);
    }

    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto rs = resample_vector(sorted, q);
    EXPECT_TRUE(std::is_sorted(rs.begin(), rs.end()));

    const std::vector<double> c(static_cast<std::size_t>(p), v[0]);
    for (double x : resample_vector(c, q)) EXPECT_EQ(x, v[0]);
  }
}

TEST(ReprTensor, ShapeAndConstantPreservation) {
  std::vector<double> data(6 * 6 * 6 * 5, 3.5);
  const Fmri4D f = make_fmri(VolumeHeader::make_4d(6, 6, 6, 5, 1.0, DataType::kFloat32), data);
  const AtlasVolume a = test::random_atlas(6, 6, 6, 3, 4);
  const ReprTensor t = build_repr_tensor(f, build_roi_index(a), 10);
  EXPECT_EQ(t.n_rois, 3);
  EXPECT_EQ(t.n_trs, 5);
  EXPECT_EQ(t.width(), 30);
  EXPECT_EQ(t.values.size(), 3u * 5u * 30u);
  for (double v : t.values) EXPECT_EQ(v, 3.5);
}

TEST(ReprTensor, ComposesAxisMeanAndInterpolationOracles) {
  const Fmri4D f = test::random_fmri(12, 12, 12, 4, 31);
  const AtlasVolume a = test::random_atlas(12, 12, 12, 2, 32);
  const auto rois = build_roi_index(a);
  const ReprTensor t = build_repr_tensor(f, rois, 4);
  for (int r = 0; r < 2; ++r) {
    for (int64_t tr = 0; tr < 4; ++tr) {
      for (int ax = 0; ax < 3; ++ax) {
        // Brute-force occupied-plane means along `ax`.
        std::vector<double> sum(12, 0.0);
        std::vector<int> cnt(12, 0);
        for (int64_t z = 0; z < 12; ++z)
          for (int64_t y = 0; y < 12; ++y)
            for (int64_t x = 0; x < 12; ++x) {
              if (a.at(x, y, z) != r + 1) continue;
              const int64_t k = ax == 0 ? x : ax == 1 ? y : z;
              sum[static_cast<std::size_t>(k)] += f.at(x, y, z, tr);
              ++cnt[static_cast<std::size_t>(k)];
            }
        std::vector<double> v;
        for (int k = 0; k < 12; ++k) {
          if (cnt[static_cast<std::size_t>(k)] > 0) v.push_back(sum[static_cast<std::size_t>(k)] / cnt[static_cast<std::size_t>(k)]);
        }
        const auto want = oracle_resample(v, 4);
        const auto got = t.at(r, tr);
        for (int i = 0; i < 4; ++i) {
          EXPECT_NEAR(got[static_cast<std::size_t>(ax * 4 + i)], want[static_cast<std::size_t>(i)], 1e-6);
        }
      }
    }
  }
}

TEST(ReprTensor, RejectsSmallQ) {
  const Fmri4D f = test::random_fmri(4, 4, 4, 2, 1);
  const AtlasVolume a = test::random_atlas(4, 4, 4, 2, 1);
  EXPECT_THROW(build_repr_tensor(f, build_roi_index(a), 1), ConfigError);
}

TEST(ReprTensor, CacheRoundTrip) {
  const Fmri4D f = test::random_fmri(6, 6, 6, 3, 2);
  const AtlasVolume a = test::random_atlas(6, 6, 6, 2, 2);
  const ReprTensor t = build_repr_tensor(f, build_roi_index(a), 5);
  test::TempDir dir;
  write_repr_cache(t, dir / "c.awrt");
  EXPECT_EQ(std::filesystem::file_size(dir / "c.awrt"), 4 + 4 * 4 + t.values.size() * 4);
  const ReprTensor r = read_repr_cache(dir / "c.awrt");
  EXPECT_EQ(r.n_rois, t.n_rois);
  EXPECT_EQ(r.n_trs, t.n_trs);
  EXPECT_EQ(r.q, 5);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    EXPECT_EQ(r.values[i], static_cast<double>(static_cast<float>(t.values[i])));
  }
  const auto bytes = test::read_bytes(dir / "c.awrt");
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "AWRT");

  test::write_bytes(dir / "bad.awrt", {'X', 'W', 'R', 'T', 1, 0, 0, 0});
  EXPECT_THROW(read_repr_cache(dir / "bad.awrt"), FormatError);
}

class KernelThreads : public ::testing::TestWithParam<int> {
 protected:
  void TearDown() override { kernels::set_num_threads(0); }
};

TEST_P(KernelThreads, OmpMatchesSerialBitForBit) {
  kernels::set_num_threads(GetParam());
  const Fmri4D f = test::random_fmri(10, 9, 8, 6, 77);
  const AtlasVolume a = test::random_atlas(10, 9, 8, 5, 78);
  const auto rois = build_roi_index(a);

  SeriesMatrix s1, s2;
  kernels::serial::extract_ats(f, rois, s1);
  kernels::omp::extract_ats(f, rois, s2);
  EXPECT_EQ(s1.values, s2.values);

  ReprTensor r1, r2;
  r1.q = r2.q = 7;
  kernels::serial::build_repr(f, rois, r1);
  kernels::omp::build_repr(f, rois, r2);
  EXPECT_EQ(r1.values, r2.values);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> pts(300 * 9);
  for (double& p : pts) p = g(rng);
  std::vector<int> labels(300);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  const auto d1 = kernels::serial::pair_distances(pts, 9, labels);
  const auto d2 = kernels::omp::pair_distances(pts, 9, labels);
  EXPECT_EQ(d1.same_sum, d2.same_sum);
  EXPECT_EQ(d1.cross_sum, d2.cross_sum);
  EXPECT_EQ(d1.same_pairs, d2.same_pairs);
  EXPECT_EQ(d1.cross_pairs, d2.cross_pairs);
  EXPECT_EQ(d1.same_pairs + d1.cross_pairs, 300 * 299 / 2);
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelThreads, ::testing::Values(1, 2, 3, 8));

}  // namespace
}  // namespace awats
