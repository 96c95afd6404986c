#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "awats/parcellation.hpp"
#include "awats/volume_io.hpp"

namespace awats {

constexpr int kDefaultResampleSize = 10;

// R x T x 3q representation tensor. Inner layout per (roi, t) is the three
// resampled axis-mean vectors concatenated: x, then y, then z.
struct ReprTensor {
  int n_rois = 0;
  int64_t n_trs = 0;
  int q = kDefaultResampleSize;
  std::vector<double> values;

  int width() const { return 3 * q; }
  std::size_t offset(int roi, int64_t t) const {
    return static_cast<std::size_t>((roi * n_trs + t) * width());
  }
  std::span<const double> at(int roi, int64_t t) const {
    return {values.data() + offset(roi, t), static_cast<std::size_t>(width())};
  }
  std::span<double> at(int roi, int64_t t) {
    return {values.data() + offset(roi, t), static_cast<std::size_t>(width())};
  }
};

// Linear-interpolation resampling of `v` (length p) to length q. Output
// element i (1-based) samples position i*p/q of the 1-based input; integer
// positions return the exact element, others interpolate between the two
// neighbouring samples, with neighbours clamped into [1, p].
std::vector<double> resample_vector(std::span<const double> v, int q);
void resample_into(std::span<const double> v, std::span<double> out);

ReprTensor build_repr_tensor(const Fmri4D& fmri,
                             const std::vector<RoiIndex>& rois, int q);

// AWRT binary cache: magic, version, R, T, q (u32), then float32 values.
void write_repr_cache(const ReprTensor& tensor, const std::filesystem::path& path);
ReprTensor read_repr_cache(const std::filesystem::path& path);

void write_repr_csv(const ReprTensor& tensor, const std::filesystem::path& path);

}  // namespace awats
