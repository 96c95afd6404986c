#pragma once

// Shared test helpers: scratch directories, random volumes, and a NIfTI-1
// byte writer that does not go through the library.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "awats/volume_io.hpp"

namespace awats::test {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("awats-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct RawNifti {
  std::vector<int16_t> dims;  // 3 or 4 sizes
  int16_t datatype = 16;
  std::array<float, 4> pixdim{1, 1, 1, 1};
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::array<char, 4> magic{'n', '+', '1', '\0'};
  bool big_endian = false;
  std::vector<double> values;
};

namespace detail {

template <typename U>
void put(std::vector<uint8_t>& buf, std::size_t offset, U v, bool big) {
  uint8_t b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  if (big) std::reverse(b, b + sizeof(U));
  std::memcpy(buf.data() + offset, b, sizeof(U));
}

}  // namespace detail

// Header field offsets follow the NIfTI-1 layout.
inline std::vector<uint8_t> nifti_bytes(const RawNifti& n) {
  const bool be = n.big_endian;
  std::size_t width = 0;
  switch (n.datatype) {
    case 2: width = 1; break;
    case 4: width = 2; break;
    case 8: width = 4; break;
    case 16: width = 4; break;
    case 64: width = 8; break;
    default: width = 4; break;
  }
  std::vector<uint8_t> buf(352 + n.values.size() * width, 0);
  detail::put<int32_t>(buf, 0, 348, be);
  detail::put<int16_t>(buf, 40, static_cast<int16_t>(n.dims.size()), be);
  for (std::size_t i = 0; i < 7; ++i) {
    detail::put<int16_t>(buf, 42 + 2 * i, i < n.dims.size() ? n.dims[i] : int16_t{1}, be);
  }
  detail::put<int16_t>(buf, 70, n.datatype, be);
  detail::put<int16_t>(buf, 72, static_cast<int16_t>(8 * width), be);
  detail::put<float>(buf, 76, 1.0f, be);
  for (std::size_t i = 0; i < 4; ++i) detail::put<float>(buf, 80 + 4 * i, n.pixdim[i], be);
  detail::put<float>(buf, 108, 352.0f, be);
  detail::put<float>(buf, 112, n.scl_slope, be);
  detail::put<float>(buf, 116, n.scl_inter, be);
  std::memcpy(buf.data() + 344, n.magic.data(), 4);
  for (std::size_t i = 0; i < n.values.size(); ++i) {
    const std::size_t off = 352 + i * width;
    switch (n.datatype) {
      case 2: buf[off] = static_cast<uint8_t>(n.values[i]); break;
      case 4: detail::put<int16_t>(buf, off, static_cast<int16_t>(n.values[i]), be); break;
      case 8: detail::put<int32_t>(buf, off, static_cast<int32_t>(n.values[i]), be); break;
      case 64: detail::put<double>(buf, off, n.values[i], be); break;
      default: detail::put<float>(buf, off, static_cast<float>(n.values[i]), be); break;
    }
  }
  return buf;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Fmri4D random_fmri(int64_t x, int64_t y, int64_t z, int64_t t, uint64_t seed,
                          double tr = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(100.0, 10.0);
  std::vector<double> data(static_cast<std::size_t>(x * y * z * t));
  for (double& v : data) v = g(rng);
  return make_fmri(VolumeHeader::make_4d(x, y, z, t, tr, DataType::kFloat64), std::move(data));
}

// Random labels in 0..n_rois with every label present.
inline AtlasVolume random_atlas(int64_t x, int64_t y, int64_t z, int n_rois, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int32_t> d(0, n_rois);
  std::vector<int32_t> labels(static_cast<std::size_t>(x * y * z));
  for (int32_t& l : labels) l = d(rng);
  for (int r = 1; r <= n_rois; ++r) labels[static_cast<std::size_t>(r - 1)] = r;
  return make_atlas(VolumeHeader::make_3d(x, y, z, DataType::kInt16), std::move(labels));
}

}  // namespace awats::test
