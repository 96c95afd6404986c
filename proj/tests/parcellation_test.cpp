#include <gtest/gtest.h>

#include <cmath>

#include "awats/errors.hpp"
#include "awats/parcellation.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace awats {
namespace {

AtlasVolume atlas_from(int64_t x, int64_t y, int64_t z,
                       const std::vector<std::array<int64_t, 4>>& voxels) {
  std::vector<int32_t> labels(static_cast<std::size_t>(x * y * z), 0);
  for (const auto& v : voxels) {
    labels[static_cast<std::size_t>(v[0] + x * (v[1] + y * v[2]))] = static_cast<int32_t>(v[3]);
  }
  return make_atlas(VolumeHeader::make_3d(x, y, z, DataType::kInt16), std::move(labels));
}

std::vector<double> frame_with(int64_t x, int64_t y, int64_t z,
                               const std::vector<std::array<double, 4>>& values) {
  std::vector<double> f(static_cast<std::size_t>(x * y * z), 0.0);
  for (const auto& v : values) {
    f[static_cast<std::size_t>(v[0] + static_cast<double>(x) * (v[1] + static_cast<double>(y) * v[2]))] = v[3];
  }
  return f;
}

using test::brute_ats;
using test::brute_axis_mean;

TEST(RoiIndex, SingleVoxel) {
  const AtlasVolume a = atlas_from(5, 5, 6, {{1, 2, 3, 1}});
  const auto rois = build_roi_index(a);
  ASSERT_EQ(rois.size(), 1u);
  EXPECT_EQ(rois[0].index_lists[0], std::vector<int>{1});
  EXPECT_EQ(rois[0].index_lists[1], std::vector<int>{2});
  EXPECT_EQ(rois[0].index_lists[2], std::vector<int>{3});
  EXPECT_EQ(rois[0].clipped_mask, std::vector<uint8_t>{1});
  EXPECT_EQ(rois[0].voxel_count, 1);
}

TEST(RoiIndex, SkipsUnoccupiedPlanes) {
  const AtlasVolume a = atlas_from(4, 2, 2, {{0, 0, 0, 1}, {2, 0, 0, 1}});
  const auto rois = build_roi_index(a);
  EXPECT_EQ(rois[0].index_lists[0], (std::vector<int>{0, 2}));
  EXPECT_EQ(rois[0].extent(0), 2);
  EXPECT_EQ(rois[0].extent(1), 1);
}

TEST(RoiIndex, FullCubeClipsToItself) {
  std::vector<int32_t> labels(64, 1);
  const AtlasVolume a = make_atlas(VolumeHeader::make_3d(4, 4, 4, DataType::kInt16), labels);
  const auto rois = build_roi_index(a);
  for (int ax = 0; ax < 3; ++ax) {
    EXPECT_EQ(rois[0].index_lists[static_cast<std::size_t>(ax)], (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(rois[0].plane_counts[static_cast<std::size_t>(ax)],
              (std::vector<int64_t>{16, 16, 16, 16}));
  }
  EXPECT_EQ(rois[0].clipped_mask, std::vector<uint8_t>(64, 1));
}

TEST(RoiIndex, ClippingIsTightAndCountsMatch) {
  const AtlasVolume a = test::random_atlas(9, 7, 8, 5, 11);
  for (const RoiIndex& r : build_roi_index(a)) {
    int64_t total = 0;
    for (uint8_t m : r.clipped_mask) total += m;
    EXPECT_EQ(total, r.voxel_count);
    for (int ax = 0; ax < 3; ++ax) {
      int64_t sum = 0;
      for (int64_t c : r.plane_counts[static_cast<std::size_t>(ax)]) {
        EXPECT_GE(c, 1);
        sum += c;
      }
      EXPECT_EQ(sum, r.voxel_count);
    }
    // First and last slabs along x are nonempty.
    for (int cx : {0, r.extent(0) - 1}) {
      bool any = false;
      for (int cz = 0; cz < r.extent(2); ++cz)
        for (int cy = 0; cy < r.extent(1); ++cy) any = any || r.clipped(cx, cy, cz);
      EXPECT_TRUE(any);
    }
  }
}

TEST(Ats, MatchesBruteForce) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const Fmri4D f = test::random_fmri(8, 8, 8, 5, seed);
    const AtlasVolume a = test::random_atlas(8, 8, 8, 3, seed + 100);
    const SeriesMatrix s = extract_ats(f, build_roi_index(a));
    const auto ref = brute_ats(f, a);
    ASSERT_EQ(s.n_rois, 3);
    ASSERT_EQ(s.n_trs, 5);
    EXPECT_EQ(s.kind, SeriesKind::kAts);
    for (int r = 0; r < 3; ++r)
      for (int64_t t = 0; t < 5; ++t) {
        const double want = ref[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
        EXPECT_NEAR(s.at(r, t), want, 1e-6 * std::abs(want));
      }
  }
}

TEST(Ats, ConstantAndTwoVoxel) {
  std::vector<double> data(3 * 3 * 3 * 2, 4.25);
  const Fmri4D f = make_fmri(VolumeHeader::make_4d(3, 3, 3, 2, 1.0, DataType::kFloat32), data);
  const AtlasVolume a = test::random_atlas(3, 3, 3, 2, 5);
  const SeriesMatrix s = extract_ats(f, build_roi_index(a));
  for (double v : s.values) EXPECT_EQ(v, 4.25);

  const AtlasVolume two = atlas_from(2, 1, 1, {{0, 0, 0, 1}, {1, 0, 0, 1}});
  const Fmri4D g = make_fmri(VolumeHeader::make_4d(2, 1, 1, 1, 1.0, DataType::kFloat32), {1.0, 3.0});
  EXPECT_EQ(extract_ats(g, build_roi_index(two)).at(0, 0), 2.0);
}

TEST(Ats, GridMismatchIsDimensionError) {
  const Fmri4D f = test::random_fmri(4, 4, 4, 2, 1);
  const AtlasVolume a = test::random_atlas(4, 4, 5, 2, 1);
  EXPECT_THROW(extract_ats(f, build_roi_index(a)), DimensionError);
}

TEST(Ats, LabelPermutationPermutesRows) {
  const Fmri4D f = test::random_fmri(6, 6, 6, 3, 9);
  const AtlasVolume a = test::random_atlas(6, 6, 6, 4, 9);
  const int perm[5] = {0, 3, 1, 4, 2};  // label l -> perm[l]
  std::vector<int32_t> relabeled = a.labels;
  for (int32_t& l : relabeled) l = perm[l];
  const AtlasVolume b = make_atlas(a.header, relabeled);
  const SeriesMatrix sa = extract_ats(f, build_roi_index(a));
  const SeriesMatrix sb = extract_ats(f, build_roi_index(b));
  for (int l = 1; l <= 4; ++l)
    for (int64_t t = 0; t < 3; ++t) EXPECT_EQ(sa.at(l - 1, t), sb.at(perm[l] - 1, t));
}

TEST(AxisMeans, TwoByTwoExample) {
  // Values indexed by (x, y): [[1, 2], [3, 4]].
  const AtlasVolume a = atlas_from(2, 2, 1, {{0, 0, 0, 1}, {0, 1, 0, 1}, {1, 0, 0, 1}, {1, 1, 0, 1}});
  const auto f = frame_with(2, 2, 1, {{0, 0, 0, 1}, {0, 1, 0, 2}, {1, 0, 0, 3}, {1, 1, 0, 4}});
  const AxisMeans m = axis_means(f, build_roi_index(a)[0]);
  EXPECT_EQ(m.vx, (std::vector<double>{1.5, 3.5}));
  EXPECT_EQ(m.vy, (std::vector<double>{2.0, 3.0}));
  EXPECT_EQ(m.vz, (std::vector<double>{2.5}));
}

TEST(AxisMeans, LShapedMask) {
  const AtlasVolume a = atlas_from(2, 2, 1, {{0, 0, 0, 1}, {1, 0, 0, 1}, {1, 1, 0, 1}});
  const auto f = frame_with(2, 2, 1, {{0, 0, 0, 1}, {1, 0, 0, 2}, {1, 1, 0, 3}});
  const AxisMeans m = axis_means(f, build_roi_index(a)[0]);
  EXPECT_EQ(m.vx, (std::vector<double>{1.0, 2.5}));
  EXPECT_EQ(m.vy, (std::vector<double>{1.5, 3.0}));
  EXPECT_EQ(m.vz, (std::vector<double>{2.0}));
}

TEST(AxisMeans, ConstantRoi) {
  const AtlasVolume a = test::random_atlas(5, 5, 5, 2, 3);
  std::vector<double> f(125, -7.5);
  for (const RoiIndex& r : build_roi_index(a)) {
    const AxisMeans m = axis_means(f, r);
    for (const auto* v : {&m.vx, &m.vy, &m.vz})
      for (double x : *v) EXPECT_EQ(x, -7.5);
  }
}

TEST(AxisMeans, MatchBruteForceAndMassConsistency) {
  const Fmri4D f = test::random_fmri(8, 8, 8, 5, 21);
  const AtlasVolume a = test::random_atlas(8, 8, 8, 3, 22);
  const auto rois = build_roi_index(a);
  const SeriesMatrix ats = extract_ats(f, rois);
  for (int64_t t = 0; t < 5; ++t) {
    std::span<const double> frame(f.frame(t), 512);
    for (std::size_t r = 0; r < rois.size(); ++r) {
      const AxisMeans m = axis_means(frame, rois[r]);
      const std::vector<double>* v[3] = {&m.vx, &m.vy, &m.vz};
      const double mass = static_cast<double>(rois[r].voxel_count) * ats.at(static_cast<int>(r), t);
      for (int ax = 0; ax < 3; ++ax) {
        const auto ref = brute_axis_mean(f, a, static_cast<int>(r) + 1, ax, t);
        ASSERT_EQ(v[ax]->size(), ref.size());
        double weighted = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
          EXPECT_NEAR((*v[ax])[i], ref[i], 1e-9 * std::abs(ref[i]));
          weighted += static_cast<double>(rois[r].plane_counts[static_cast<std::size_t>(ax)][i]) * (*v[ax])[i];
        }
        EXPECT_NEAR(weighted, mass, 1e-6 * std::abs(mass));
      }
    }
  }
}

}  // namespace
}  // namespace awats
