#pragma once

// Data-parallel kernels behind the extraction and evaluation modules.
//
// Every kernel exists twice: `serial` is the straightforward reference kept
// for tests and benchmarks, `omp` splits independent work items across
// OpenMP threads. Each work item runs the same code in both versions, so the
// results are bit-identical regardless of thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "awats/parcellation.hpp"
#include "awats/resampling.hpp"

namespace awats::kernels {

// Sums of Euclidean distances over unordered point pairs, split by whether
// the pair shares a label.
struct PairDistanceSums {
  double same_sum = 0.0;
  double cross_sum = 0.0;
  int64_t same_pairs = 0;
  int64_t cross_pairs = 0;
};

namespace serial {

void extract_ats(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                 SeriesMatrix& out);
void build_repr(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                ReprTensor& out);
// `points` is n x dim row-major.
PairDistanceSums pair_distances(std::span<const double> points, int dim,
                                std::span<const int> labels);

}  // namespace serial

namespace omp {

void extract_ats(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                 SeriesMatrix& out);
void build_repr(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                ReprTensor& out);
PairDistanceSums pair_distances(std::span<const double> points, int dim,
                                std::span<const int> labels);

}  // namespace omp

// Thread count used by the omp kernels; 0 restores the OpenMP default.
void set_num_threads(int n);
int num_threads();

}  // namespace awats::kernels
