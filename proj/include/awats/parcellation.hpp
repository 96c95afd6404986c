#pragma once

// Per-ROI clipped masks and the two per-TR summaries computed from them: the
// plain voxel average (ATS) and the three axis-mean representation vectors.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "awats/volume_io.hpp"

namespace awats {

enum class SeriesKind { kAts, kAwats, kAwatsPca };

const char* to_string(SeriesKind kind);

// R x T regional time series, row-major (row = ROI).
struct SeriesMatrix {
  int n_rois = 0;
  int64_t n_trs = 0;
  SeriesKind kind = SeriesKind::kAts;
  std::vector<double> values;

  double& at(int roi, int64_t t) {
    return values[static_cast<std::size_t>(roi * n_trs + t)];
  }
  double at(int roi, int64_t t) const {
    return values[static_cast<std::size_t>(roi * n_trs + t)];
  }
};

// One ROI's mask restricted to the planes it occupies.
//
// index_lists[a] holds the sorted 0-based grid coordinates along axis a
// (x, y, z) whose plane intersects the mask; the clipped box is the
// cartesian product of the three lists. Planes that do not touch the mask
// are skipped even when they lie between occupied planes.
struct RoiIndex {
  int roi_id = 0;
  // Dimensions of the voxel grid the index was built on.
  std::array<int64_t, 3> grid{0, 0, 0};
  std::array<std::vector<int>, 3> index_lists;
  // Clipped mask, x fastest, sized extent(0) * extent(1) * extent(2).
  std::vector<uint8_t> clipped_mask;
  int64_t voxel_count = 0;
  // Number of mask voxels in each occupied plane, per axis (all >= 1).
  std::array<std::vector<int64_t>, 3> plane_counts;

  // Mask voxels in z, y, x ascending order: offset into a 3D frame and the
  // clipped coordinate along each axis. This fixes the summation order.
  struct Voxel {
    int64_t offset;
    int cx, cy, cz;
  };
  std::vector<Voxel> voxels;

  int extent(int axis) const {
    return static_cast<int>(index_lists[static_cast<std::size_t>(axis)].size());
  }
  bool clipped(int cx, int cy, int cz) const {
    return clipped_mask[static_cast<std::size_t>(
               cx + extent(0) * (cy + extent(1) * cz))] != 0;
  }
};

struct AxisMeans {
  std::vector<double> vx, vy, vz;
};

// One RoiIndex per label 1..R, in ascending label order. Throws
// EmptyRoiError for a label in 1..R without voxels.
std::vector<RoiIndex> build_roi_index(const AtlasVolume& atlas);

// Throws DimensionError when the fMRI grid differs from the grid the ROI
// index was built on.
void check_grid(const Fmri4D& fmri, const std::vector<RoiIndex>& rois);

// Plain per-ROI voxel average for every TR.
SeriesMatrix extract_ats(const Fmri4D& fmri, const std::vector<RoiIndex>& rois);

// Axis means of one TR frame (X*Y*Z values, x fastest) over one ROI.
AxisMeans axis_means(std::span<const double> frame, const RoiIndex& roi);

// Same, writing into caller buffers sized to the ROI extents.
void axis_means_into(const double* frame, const RoiIndex& roi, double* vx,
                     double* vy, double* vz);

}  // namespace awats
