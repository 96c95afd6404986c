#include "awats/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace awats::kernels {

namespace {

// Single work items shared by both variants.

double roi_mean(const double* frame, const RoiIndex& roi) {
  double sum = 0.0;
  for (const RoiIndex::Voxel& v : roi.voxels) sum += frame[v.offset];
  return sum / static_cast<double>(roi.voxel_count);
}

std::size_t max_extent(const std::vector<RoiIndex>& rois) {
  std::size_t m = 1;
  for (const RoiIndex& r : rois) {
    for (int a = 0; a < 3; ++a) m = std::max(m, static_cast<std::size_t>(r.extent(a)));
  }
  return m;
}

// Axis means followed by resampling for one (roi, t); `scratch` holds at
// least 3 * max_extent doubles.
void repr_item(const double* frame, const RoiIndex& roi, int q,
               double* scratch, double* out) {
  double* vx = scratch;
  double* vy = vx + roi.extent(0);
  double* vz = vy + roi.extent(1);
  axis_means_into(frame, roi, vx, vy, vz);
  const auto uq = static_cast<std::size_t>(q);
  resample_into({vx, static_cast<std::size_t>(roi.extent(0))}, {out, uq});
  resample_into({vy, static_cast<std::size_t>(roi.extent(1))}, {out + q, uq});
  resample_into({vz, static_cast<std::size_t>(roi.extent(2))}, {out + 2 * q, uq});
}

void shape_series(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                  SeriesMatrix& out) {
  out.n_rois = static_cast<int>(rois.size());
  out.n_trs = fmri.header.nt();
  out.kind = SeriesKind::kAts;
  out.values.assign(static_cast<std::size_t>(out.n_rois * out.n_trs), 0.0);
}

void shape_repr(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                ReprTensor& out) {
  out.n_rois = static_cast<int>(rois.size());
  out.n_trs = fmri.header.nt();
  out.values.assign(static_cast<std::size_t>(out.n_rois) *
                        static_cast<std::size_t>(out.n_trs) *
                        static_cast<std::size_t>(out.width()),
                    0.0);
}

// Row i's distances to rows j > i.
void pair_row(std::span<const double> points, int dim,
              std::span<const int> labels, std::size_t i,
              PairDistanceSums& acc) {
  const std::size_t n = labels.size();
  const double* pi = points.data() + i * static_cast<std::size_t>(dim);
  for (std::size_t j = i + 1; j < n; ++j) {
    const double* pj = points.data() + j * static_cast<std::size_t>(dim);
    double d2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double d = pi[k] - pj[k];
      d2 += d * d;
    }
    const double d = std::sqrt(d2);
    if (labels[i] == labels[j]) {
      acc.same_sum += d;
      ++acc.same_pairs;
    } else {
      acc.cross_sum += d;
      ++acc.cross_pairs;
    }
  }
}

}  // namespace

namespace serial {

void extract_ats(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                 SeriesMatrix& out) {
  shape_series(fmri, rois, out);
  for (int r = 0; r < out.n_rois; ++r) {
    for (int64_t t = 0; t < out.n_trs; ++t) {
      out.at(r, t) = roi_mean(fmri.frame(t), rois[static_cast<std::size_t>(r)]);
    }
  }
}

void build_repr(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                ReprTensor& out) {
  shape_repr(fmri, rois, out);
  std::vector<double> scratch(3 * max_extent(rois));
  for (int r = 0; r < out.n_rois; ++r) {
    for (int64_t t = 0; t < out.n_trs; ++t) {
      repr_item(fmri.frame(t), rois[static_cast<std::size_t>(r)], out.q,
                scratch.data(), out.values.data() + out.offset(r, t));
    }
  }
}

PairDistanceSums pair_distances(std::span<const double> points, int dim,
                                std::span<const int> labels) {
  PairDistanceSums acc;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    PairDistanceSums row;
    pair_row(points, dim, labels, i, row);
    acc.same_sum += row.same_sum;
    acc.cross_sum += row.cross_sum;
    acc.same_pairs += row.same_pairs;
    acc.cross_pairs += row.cross_pairs;
  }
  return acc;
}

}  // namespace serial

namespace omp {

void extract_ats(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                 SeriesMatrix& out) {
  shape_series(fmri, rois, out);
  const int64_t n_items = out.n_rois * out.n_trs;
#pragma omp parallel for schedule(static)
  for (int64_t item = 0; item < n_items; ++item) {
    const int r = static_cast<int>(item / out.n_trs);
    const int64_t t = item % out.n_trs;
    out.at(r, t) = roi_mean(fmri.frame(t), rois[static_cast<std::size_t>(r)]);
  }
}

void build_repr(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                ReprTensor& out) {
  shape_repr(fmri, rois, out);
  const int64_t n_items = out.n_rois * out.n_trs;
  const std::size_t scratch_size = 3 * max_extent(rois);
#pragma omp parallel
  {
    std::vector<double> scratch(scratch_size);
#pragma omp for schedule(static)
    for (int64_t item = 0; item < n_items; ++item) {
      const int r = static_cast<int>(item / out.n_trs);
      const int64_t t = item % out.n_trs;
      repr_item(fmri.frame(t), rois[static_cast<std::size_t>(r)], out.q,
                scratch.data(), out.values.data() + out.offset(r, t));
    }
  }
}

PairDistanceSums pair_distances(std::span<const double> points, int dim,
                                std::span<const int> labels) {
  // Per-row partials reduced in row order keep the sum independent of the
  // schedule and equal to the serial loop.
  const std::size_t n = labels.size();
  std::vector<PairDistanceSums> rows(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) {
    pair_row(points, dim, labels, i, rows[i]);
  }
  PairDistanceSums acc;
  for (const PairDistanceSums& r : rows) {
    acc.same_sum += r.same_sum;
    acc.cross_sum += r.cross_sum;
    acc.same_pairs += r.same_pairs;
    acc.cross_pairs += r.cross_pairs;
  }
  return acc;
}

}  // namespace omp

void set_num_threads(int n) {
  omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

int num_threads() { return omp_get_max_threads(); }

}  // namespace awats::kernels
