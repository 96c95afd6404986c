#pragma once

// Brute-force reference computations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "awats/volume_io.hpp"

namespace awats::test {

// Average every voxel carrying each label; [roi][t].
inline std::vector<std::vector<double>> brute_ats(const Fmri4D& f, const AtlasVolume& a) {
  std::vector<std::vector<double>> sum(static_cast<std::size_t>(a.n_rois),
                                       std::vector<double>(static_cast<std::size_t>(f.header.nt())));
  std::vector<int64_t> count(static_cast<std::size_t>(a.n_rois), 0);
  for (int64_t z = 0; z < a.header.nz(); ++z)
    for (int64_t y = 0; y < a.header.ny(); ++y)
      for (int64_t x = 0; x < a.header.nx(); ++x) {
        const int l = a.at(x, y, z);
        if (l == 0) continue;
        ++count[static_cast<std::size_t>(l - 1)];
        for (int64_t t = 0; t < f.header.nt(); ++t) {
          sum[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(t)] += f.at(x, y, z, t);
        }
      }
  for (std::size_t r = 0; r < sum.size(); ++r)
    for (double& s : sum[r]) s /= static_cast<double>(count[r]);
  return sum;
}

// Per occupied plane along `axis` (0..2), the mean of the label's voxels.
inline std::vector<double> brute_axis_mean(const Fmri4D& f, const AtlasVolume& a, int label,
                                           int axis, int64_t t) {
  const int64_t n = a.header.dims[static_cast<std::size_t>(axis)];
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
  std::vector<int64_t> cnt(static_cast<std::size_t>(n), 0);
  for (int64_t z = 0; z < a.header.nz(); ++z)
    for (int64_t y = 0; y < a.header.ny(); ++y)
      for (int64_t x = 0; x < a.header.nx(); ++x) {
        if (a.at(x, y, z) != label) continue;
        const auto k = static_cast<std::size_t>(axis == 0 ? x : axis == 1 ? y : z);
        sum[k] += f.at(x, y, z, t);
        ++cnt[k];
      }
  std::vector<double> out;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    if (cnt[k] > 0) out.push_back(sum[k] / static_cast<double>(cnt[k]));
  }
  return out;
}

// Linear interpolation at 1-based positions i*p/q, neighbours clamped.
inline std::vector<double> oracle_resample(const std::vector<double>& v, int q) {
  const int p = static_cast<int>(v.size());
  std::vector<double> out;
  for (int i = 1; i <= q; ++i) {
    const double s = static_cast<double>(i) * p / q;
    if (s == std::floor(s)) {
      out.push_back(v[static_cast<std::size_t>(s) - 1]);
      continue;
    }
    const int j = std::clamp(static_cast<int>(std::floor(s)), 1, p);
    const int k = std::clamp(static_cast<int>(std::floor(s)) + 1, 1, p);
    if (j == k) {
      out.push_back(v[static_cast<std::size_t>(j) - 1]);
    } else {
      const double vj = v[static_cast<std::size_t>(j) - 1];
      const double vk = v[static_cast<std::size_t>(k) - 1];
      out.push_back(vj + (vk - vj) / (k - j) * (s - j));
    }
  }
  return out;
}

// Shapley values from the definition over bitmask coalitions.
inline std::vector<double> brute_shapley(int n, const std::function<double(unsigned)>& v) {
  std::vector<double> fact(static_cast<std::size_t>(n + 1), 1.0);
  for (int i = 1; i <= n; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (unsigned s = 0; s < (1u << n); ++s) {
      if (s & (1u << i)) continue;
      const int k = __builtin_popcount(s);
      const double w = fact[static_cast<std::size_t>(k)] * fact[static_cast<std::size_t>(n - k - 1)] /
                       fact[static_cast<std::size_t>(n)];
      phi[static_cast<std::size_t>(i)] += w * (v(s | (1u << i)) - v(s));
    }
  return phi;
}

}  // namespace awats::test
