#include "awats/parcellation.hpp"

#include <string>

#include "awats/errors.hpp"
#include "awats/kernels.hpp"

namespace awats {

const char* to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::kAts: return "ATS";
    case SeriesKind::kAwats: return "AWATS";
    case SeriesKind::kAwatsPca: return "AWATS_PCA";
  }
  return "?";
}

std::vector<RoiIndex> build_roi_index(const AtlasVolume& atlas) {
  const int64_t nx = atlas.header.nx();
  const int64_t ny = atlas.header.ny();
  const int64_t nz = atlas.header.nz();
  const int n_rois = atlas.n_rois;

  // Per-ROI occupancy of every plane along each axis.
  std::vector<std::array<std::vector<int64_t>, 3>> occupancy(
      static_cast<std::size_t>(n_rois));
  for (auto& occ : occupancy) {
    occ[0].assign(static_cast<std::size_t>(nx), 0);
    occ[1].assign(static_cast<std::size_t>(ny), 0);
    occ[2].assign(static_cast<std::size_t>(nz), 0);
  }
  for (int64_t z = 0; z < nz; ++z) {
    for (int64_t y = 0; y < ny; ++y) {
      for (int64_t x = 0; x < nx; ++x) {
        const int32_t label = atlas.at(x, y, z);
        if (label <= 0) continue;
        if (label > n_rois) {
          throw ValidationError("atlas label " + std::to_string(label) +
                                " exceeds n_rois");
        }
        auto& occ = occupancy[static_cast<std::size_t>(label - 1)];
        ++occ[0][static_cast<std::size_t>(x)];
        ++occ[1][static_cast<std::size_t>(y)];
        ++occ[2][static_cast<std::size_t>(z)];
      }
    }
  }

  std::vector<RoiIndex> rois(static_cast<std::size_t>(n_rois));
  // Grid coordinate -> clipped coordinate, per axis; -1 when unoccupied.
  std::vector<std::array<std::vector<int>, 3>> to_clipped(
      static_cast<std::size_t>(n_rois));
  for (int r = 0; r < n_rois; ++r) {
    RoiIndex& roi = rois[static_cast<std::size_t>(r)];
    roi.roi_id = r + 1;
    roi.grid = {nx, ny, nz};
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& occ = occupancy[static_cast<std::size_t>(r)][a];
      auto& lookup = to_clipped[static_cast<std::size_t>(r)][a];
      lookup.assign(occ.size(), -1);
      for (std::size_t i = 0; i < occ.size(); ++i) {
        if (occ[i] > 0) {
          lookup[i] = static_cast<int>(roi.index_lists[a].size());
          roi.index_lists[a].push_back(static_cast<int>(i));
          roi.plane_counts[a].push_back(occ[i]);
        }
      }
    }
    if (roi.index_lists[0].empty()) throw EmptyRoiError(roi.roi_id);
    roi.clipped_mask.assign(static_cast<std::size_t>(roi.extent(0)) *
                                static_cast<std::size_t>(roi.extent(1)) *
                                static_cast<std::size_t>(roi.extent(2)),
                            0);
  }

  for (int64_t z = 0; z < nz; ++z) {
    for (int64_t y = 0; y < ny; ++y) {
      for (int64_t x = 0; x < nx; ++x) {
        const int32_t label = atlas.at(x, y, z);
        if (label <= 0) continue;
        const auto r = static_cast<std::size_t>(label - 1);
        RoiIndex& roi = rois[r];
        const auto& lookup = to_clipped[r];
        const int cx = lookup[0][static_cast<std::size_t>(x)];
        const int cy = lookup[1][static_cast<std::size_t>(y)];
        const int cz = lookup[2][static_cast<std::size_t>(z)];
        roi.clipped_mask[static_cast<std::size_t>(
            cx + roi.extent(0) * (cy + roi.extent(1) * cz))] = 1;
        roi.voxels.push_back({x + nx * (y + ny * z), cx, cy, cz});
        ++roi.voxel_count;
      }
    }
  }
  return rois;
}

void check_grid(const Fmri4D& fmri, const std::vector<RoiIndex>& rois) {
  for (const RoiIndex& roi : rois) {
    if (roi.grid[0] != fmri.header.nx() || roi.grid[1] != fmri.header.ny() ||
        roi.grid[2] != fmri.header.nz()) {
      throw DimensionError(
          "fMRI grid " + std::to_string(fmri.header.nx()) + "x" +
          std::to_string(fmri.header.ny()) + "x" +
          std::to_string(fmri.header.nz()) + " does not match atlas grid " +
          std::to_string(roi.grid[0]) + "x" + std::to_string(roi.grid[1]) +
          "x" + std::to_string(roi.grid[2]));
    }
  }
}

SeriesMatrix extract_ats(const Fmri4D& fmri, const std::vector<RoiIndex>& rois) {
  check_grid(fmri, rois);
  SeriesMatrix out;
  kernels::omp::extract_ats(fmri, rois, out);
  return out;
}

void axis_means_into(const double* frame, const RoiIndex& roi, double* vx,
                     double* vy, double* vz) {
  const int ex = roi.extent(0);
  const int ey = roi.extent(1);
  const int ez = roi.extent(2);
  for (int i = 0; i < ex; ++i) vx[i] = 0.0;
  for (int i = 0; i < ey; ++i) vy[i] = 0.0;
  for (int i = 0; i < ez; ++i) vz[i] = 0.0;
  for (const RoiIndex::Voxel& v : roi.voxels) {
    const double value = frame[v.offset];
    vx[v.cx] += value;
    vy[v.cy] += value;
    vz[v.cz] += value;
  }
  for (int i = 0; i < ex; ++i) vx[i] /= static_cast<double>(roi.plane_counts[0][static_cast<std::size_t>(i)]);
  for (int i = 0; i < ey; ++i) vy[i] /= static_cast<double>(roi.plane_counts[1][static_cast<std::size_t>(i)]);
  for (int i = 0; i < ez; ++i) vz[i] /= static_cast<double>(roi.plane_counts[2][static_cast<std::size_t>(i)]);
}

AxisMeans axis_means(std::span<const double> frame, const RoiIndex& roi) {
  if (static_cast<int64_t>(frame.size()) !=
      roi.grid[0] * roi.grid[1] * roi.grid[2]) {
    throw DimensionError("frame size does not match the ROI grid");
  }
  AxisMeans m;
  m.vx.resize(static_cast<std::size_t>(roi.extent(0)));
  m.vy.resize(static_cast<std::size_t>(roi.extent(1)));
  m.vz.resize(static_cast<std::size_t>(roi.extent(2)));
  axis_means_into(frame.data(), roi, m.vx.data(), m.vy.data(), m.vz.data());
  return m;
}

}  // namespace awats
