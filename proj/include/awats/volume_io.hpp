#pragma once

// Minimal NIfTI-1 single-file reader/writer (.nii and .nii.gz).

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace awats {

enum class DataType : int16_t {
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
};

// Size in bytes of one voxel of the given type.
std::size_t datatype_width(DataType type);

struct VolumeHeader {
  int ndim = 3;                                 // 3 or 4
  std::array<int64_t, 4> dims{1, 1, 1, 1};      // X, Y, Z, T (T = 1 for 3D)
  DataType datatype = DataType::kFloat32;
  std::array<double, 4> voxel_sizes{1, 1, 1, 1};  // mm, mm, mm, s
  double scl_slope = 0.0;
  double scl_inter = 0.0;
  // Verbatim 348-byte header as read (orientation, description, ...). Empty
  // for volumes built in memory.
  std::vector<uint8_t> raw;

  int64_t nx() const { return dims[0]; }
  int64_t ny() const { return dims[1]; }
  int64_t nz() const { return dims[2]; }
  int64_t nt() const { return ndim == 4 ? dims[3] : 1; }
  int64_t voxels_per_volume() const { return dims[0] * dims[1] * dims[2]; }
  int64_t total_voxels() const { return voxels_per_volume() * nt(); }
  double tr_seconds() const { return voxel_sizes[3]; }
  bool same_grid(const VolumeHeader& other) const;

  static VolumeHeader make_3d(int64_t x, int64_t y, int64_t z, DataType type);
  static VolumeHeader make_4d(int64_t x, int64_t y, int64_t z, int64_t t,
                              double tr_seconds, DataType type);
  // Throws ValidationError when dims/datatype/tr violate invariants.
  void validate() const;
};

// Generic volume as loaded from disk: values after scl_slope/scl_inter.
// Layout is x fastest, then y, z, t.
struct Volume {
  VolumeHeader header;
  std::vector<double> data;
};

// 4D BOLD sequence. All values finite.
struct Fmri4D {
  VolumeHeader header;
  std::vector<double> data;

  int64_t index(int64_t x, int64_t y, int64_t z, int64_t t) const {
    return x + header.dims[0] * (y + header.dims[1] * (z + header.dims[2] * t));
  }
  double at(int64_t x, int64_t y, int64_t z, int64_t t) const {
    return data[static_cast<std::size_t>(index(x, y, z, t))];
  }
  // Pointer to the first voxel of TR `t`.
  const double* frame(int64_t t) const {
    return data.data() + t * header.voxels_per_volume();
  }
};

// Integer label volume; 0 is background, labels 1..n_rois all occur.
struct AtlasVolume {
  VolumeHeader header;
  std::vector<int32_t> labels;
  int n_rois = 0;

  int32_t at(int64_t x, int64_t y, int64_t z) const {
    return labels[static_cast<std::size_t>(
        x + header.dims[0] * (y + header.dims[1] * z))];
  }
};

Volume read_volume(const std::filesystem::path& path);
// Reads and checks Fmri4D invariants (finite values).
Fmri4D read_fmri(const std::filesystem::path& path);
// Reads an integer-typed 3D volume as an atlas; derives n_rois.
AtlasVolume read_atlas(const std::filesystem::path& path);

// Builds an atlas from labels, validating the label invariants.
AtlasVolume make_atlas(VolumeHeader header, std::vector<int32_t> labels);
Fmri4D make_fmri(VolumeHeader header, std::vector<double> data);

// Writes a single-file little-endian NIfTI-1 (vox_offset 352). A ".gz"
// suffix produces gzip output.
void write_volume(const Volume& volume, const std::filesystem::path& path);
void write_volume(const Fmri4D& volume, const std::filesystem::path& path);
void write_volume(const AtlasVolume& volume, const std::filesystem::path& path);

}  // namespace awats
