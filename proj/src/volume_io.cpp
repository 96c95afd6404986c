#include "awats/volume_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <string>

#include "awats/errors.hpp"

namespace awats {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;

// Byte offsets into the NIfTI-1 header.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffMagic = 344;

// (offset, element width, count) for every multi-byte numeric field, used to
// normalise big-endian headers to little-endian in one pass.
struct Field {
  std::size_t offset;
  std::size_t width;
  std::size_t count;
};
constexpr Field kNumericFields[] = {
    {0, 4, 1},     // sizeof_hdr
    {32, 4, 1},    // extents
    {36, 2, 1},    // session_error
    {40, 2, 8},    // dim
    {56, 4, 3},    // intent_p1..3
    {68, 2, 4},    // intent_code, datatype, bitpix, slice_start
    {76, 4, 8},    // pixdim
    {108, 4, 3},   // vox_offset, scl_slope, scl_inter
    {120, 2, 1},   // slice_end
    {124, 4, 4},   // cal_max, cal_min, slice_duration, toffset
    {140, 4, 2},   // glmax, glmin
    {252, 2, 2},   // qform_code, sform_code
    {256, 4, 18},  // quatern_*, qoffset_*, srow_*
};

void swap_bytes(uint8_t* p, std::size_t width) { std::reverse(p, p + width); }

void swap_header(std::vector<uint8_t>& hdr) {
  for (const Field& f : kNumericFields) {
    for (std::size_t i = 0; i < f.count; ++i) {
      swap_bytes(hdr.data() + f.offset + i * f.width, f.width);
    }
  }
}

template <typename T>
T load(const uint8_t* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

template <typename T>
void store(uint8_t* p, T value) {
  std::memcpy(p, &value, sizeof(T));
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::vector<uint8_t> gunzip(const std::vector<uint8_t>& packed,
                            const std::filesystem::path& path) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    throw IoError("zlib init failed for " + path.string());
  }
  std::vector<uint8_t> out;
  std::vector<uint8_t> chunk(1 << 20);
  zs.next_in = const_cast<Bytef*>(packed.data());
  zs.avail_in = static_cast<uInt>(packed.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      // A cut-off gzip stream is the compressed analogue of a short file.
      throw TruncationError("corrupt or truncated gzip stream in " +
                            path.string());
    }
    out.insert(out.end(), chunk.data(),
               chunk.data() + (chunk.size() - zs.avail_out));
    if (rc != Z_STREAM_END && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw TruncationError("truncated gzip stream in " + path.string());
    }
  }
  inflateEnd(&zs);
  return out;
}

void write_file(const std::vector<uint8_t>& bytes,
                const std::filesystem::path& path) {
  const bool gz = path.extension() == ".gz";
  if (gz) {
    gzFile f = gzopen(path.string().c_str(), "wb6");
    if (f == nullptr) throw IoError("cannot write " + path.string());
    std::size_t done = 0;
    while (done < bytes.size()) {
      const auto n = static_cast<unsigned>(
          std::min<std::size_t>(bytes.size() - done, 1u << 30));
      if (gzwrite(f, bytes.data() + done, n) != static_cast<int>(n)) {
        gzclose(f);
        throw IoError("write failed for " + path.string());
      }
      done += n;
    }
    if (gzclose(f) != Z_OK) throw IoError("write failed for " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

bool is_supported_code(int16_t code) {
  switch (static_cast<DataType>(code)) {
    case DataType::kInt16:
    case DataType::kInt32:
    case DataType::kFloat32:
    case DataType::kFloat64:
      return true;
  }
  return false;
}

bool is_integer(DataType t) {
  return t == DataType::kInt16 || t == DataType::kInt32;
}

template <typename T>
void decode(const uint8_t* src, std::size_t n, bool swap, double* dst) {
  for (std::size_t i = 0; i < n; ++i) {
    uint8_t buf[sizeof(T)];
    std::memcpy(buf, src + i * sizeof(T), sizeof(T));
    if (swap) swap_bytes(buf, sizeof(T));
    dst[i] = static_cast<double>(load<T>(buf));
  }
}

template <typename T>
void encode(const std::vector<double>& src, uint8_t* dst) {
  for (std::size_t i = 0; i < src.size(); ++i) {
    store<T>(dst + i * sizeof(T), static_cast<T>(src[i]));
  }
}

void check_representable(const std::vector<double>& data, DataType type) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  if (type == DataType::kInt16) {
    lo = std::numeric_limits<int16_t>::min();
    hi = std::numeric_limits<int16_t>::max();
  } else if (type == DataType::kInt32) {
    lo = std::numeric_limits<int32_t>::min();
    hi = std::numeric_limits<int32_t>::max();
  }
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw ValidationError("volume contains a non-finite value");
    }
    if (is_integer(type) && (v != std::floor(v) || v < lo || v > hi)) {
      throw ValidationError("value " + std::to_string(v) +
                            " not representable in an integer datatype");
    }
  }
}

std::vector<uint8_t> encode_volume(const VolumeHeader& h,
                                   const std::vector<double>& data) {
  h.validate();
  if (static_cast<int64_t>(data.size()) != h.total_voxels()) {
    throw DimensionError("data length does not match header dims");
  }
  check_representable(data, h.datatype);

  const std::size_t width = datatype_width(h.datatype);
  std::vector<uint8_t> bytes(kVoxOffset + data.size() * width, 0);
  uint8_t* hdr = bytes.data();
  if (h.raw.size() == kHeaderSize) {
    std::memcpy(hdr, h.raw.data(), kHeaderSize);
  }
  store<int32_t>(hdr + kOffSizeofHdr, 348);
  for (int i = 0; i < 8; ++i) {
    int16_t d = 1;
    if (i == 0) d = static_cast<int16_t>(h.ndim);
    else if (i <= h.ndim) d = static_cast<int16_t>(h.dims[i - 1]);
    store<int16_t>(hdr + kOffDim + 2 * i, d);
  }
  store<int16_t>(hdr + kOffDatatype, static_cast<int16_t>(h.datatype));
  store<int16_t>(hdr + kOffBitpix, static_cast<int16_t>(8 * width));
  float qfac = h.raw.size() == kHeaderSize ? load<float>(hdr + kOffPixdim) : 1.0f;
  if (qfac != -1.0f) qfac = 1.0f;
  store<float>(hdr + kOffPixdim, qfac);
  for (int i = 1; i < 8; ++i) {
    float p = 0.0f;
    if (i <= h.ndim) p = static_cast<float>(h.voxel_sizes[i - 1]);
    store<float>(hdr + kOffPixdim + 4 * i, p);
  }
  store<float>(hdr + kOffVoxOffset, static_cast<float>(kVoxOffset));
  // Data is written unscaled.
  store<float>(hdr + kOffSclSlope, 0.0f);
  store<float>(hdr + kOffSclInter, 0.0f);
  hdr[kOffXyztUnits] = 2 | 8;  // mm, seconds
  std::memcpy(hdr + kOffMagic, "n+1\0", 4);

  uint8_t* body = bytes.data() + kVoxOffset;
  switch (h.datatype) {
    case DataType::kInt16: encode<int16_t>(data, body); break;
    case DataType::kInt32: encode<int32_t>(data, body); break;
    case DataType::kFloat32: encode<float>(data, body); break;
    case DataType::kFloat64: encode<double>(data, body); break;
  }
  return bytes;
}

}  // namespace

std::size_t datatype_width(DataType type) {
  switch (type) {
    case DataType::kInt16: return 2;
    case DataType::kInt32: return 4;
    case DataType::kFloat32: return 4;
    case DataType::kFloat64: return 8;
  }
  throw UnsupportedTypeError("unsupported datatype code " +
                             std::to_string(static_cast<int>(type)));
}

bool VolumeHeader::same_grid(const VolumeHeader& other) const {
  return dims[0] == other.dims[0] && dims[1] == other.dims[1] &&
         dims[2] == other.dims[2];
}

VolumeHeader VolumeHeader::make_3d(int64_t x, int64_t y, int64_t z,
                                   DataType type) {
  VolumeHeader h;
  h.ndim = 3;
  h.dims = {x, y, z, 1};
  h.datatype = type;
  h.voxel_sizes = {1, 1, 1, 0};
  return h;
}

VolumeHeader VolumeHeader::make_4d(int64_t x, int64_t y, int64_t z, int64_t t,
                                   double tr_seconds, DataType type) {
  VolumeHeader h;
  h.ndim = 4;
  h.dims = {x, y, z, t};
  h.datatype = type;
  h.voxel_sizes = {1, 1, 1, tr_seconds};
  return h;
}

void VolumeHeader::validate() const {
  if (ndim != 3 && ndim != 4) {
    throw ValidationError("volume must be 3D or 4D, got ndim=" +
                          std::to_string(ndim));
  }
  for (int i = 0; i < ndim; ++i) {
    if (dims[i] < 1 || dims[i] > std::numeric_limits<int16_t>::max()) {
      throw ValidationError("dimension " + std::to_string(i) +
                            " out of range: " + std::to_string(dims[i]));
    }
  }
  if (!is_supported_code(static_cast<int16_t>(datatype))) {
    throw UnsupportedTypeError("unsupported datatype code " +
                               std::to_string(static_cast<int>(datatype)));
  }
  if (ndim == 4 && !(tr_seconds() > 0.0)) {
    throw ValidationError("4D volume needs a positive TR");
  }
}

Volume read_volume(const std::filesystem::path& path) {
  std::vector<uint8_t> bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B) {
    bytes = gunzip(bytes, path);
  }
  if (bytes.size() < kHeaderSize) {
    throw TruncationError(path.string() + " is shorter than a NIfTI-1 header");
  }
  std::vector<uint8_t> hdr(bytes.begin(), bytes.begin() + kHeaderSize);
  if (std::memcmp(hdr.data() + kOffMagic, "n+1\0", 4) != 0) {
    if (std::memcmp(hdr.data() + kOffMagic, "ni1\0", 4) == 0) {
      throw FormatError(path.string() + ": paired .hdr/.img files unsupported");
    }
    throw FormatError(path.string() + ": not a single-file NIfTI-1 (bad magic)");
  }

  // dim[0] outside 1..7 means the file was written with the other byte order.
  const int16_t dim0 = load<int16_t>(hdr.data() + kOffDim);
  const bool swap = dim0 < 1 || dim0 > 7;
  if (swap) swap_header(hdr);
  if (load<int32_t>(hdr.data() + kOffSizeofHdr) != 348) {
    throw FormatError(path.string() + ": sizeof_hdr is not 348");
  }

  VolumeHeader h;
  h.ndim = load<int16_t>(hdr.data() + kOffDim);
  if (h.ndim < 3 || h.ndim > 4) {
    // Trailing singleton dims (e.g. ndim=5 with dim[4..] = 1) are tolerated.
    int eff = h.ndim;
    while (eff > 4 && load<int16_t>(hdr.data() + kOffDim + 2 * eff) == 1) --eff;
    if (eff < 3 || eff > 4) {
      throw ValidationError(path.string() + ": only 3D/4D volumes supported");
    }
    h.ndim = eff;
  }
  for (int i = 0; i < 4; ++i) {
    h.dims[i] = i < h.ndim ? load<int16_t>(hdr.data() + kOffDim + 2 * (i + 1)) : 1;
    h.voxel_sizes[i] =
        i < h.ndim ? load<float>(hdr.data() + kOffPixdim + 4 * (i + 1)) : 0.0;
  }
  const int16_t code = load<int16_t>(hdr.data() + kOffDatatype);
  if (!is_supported_code(code)) {
    throw UnsupportedTypeError(path.string() + ": unsupported datatype code " +
                               std::to_string(code));
  }
  h.datatype = static_cast<DataType>(code);
  h.scl_slope = load<float>(hdr.data() + kOffSclSlope);
  h.scl_inter = load<float>(hdr.data() + kOffSclInter);
  h.validate();

  const auto vox_offset =
      static_cast<std::size_t>(load<float>(hdr.data() + kOffVoxOffset));
  if (vox_offset < kHeaderSize) {
    throw FormatError(path.string() + ": vox_offset inside header");
  }
  const std::size_t n = static_cast<std::size_t>(h.total_voxels());
  const std::size_t width = datatype_width(h.datatype);
  if (bytes.size() < vox_offset + n * width) {
    throw TruncationError(path.string() + ": header declares " +
                          std::to_string(n) + " voxels but file is " +
                          std::to_string(bytes.size()) + " bytes");
  }

  Volume vol;
  h.raw = std::move(hdr);
  vol.header = std::move(h);
  vol.data.resize(n);
  const uint8_t* body = bytes.data() + vox_offset;
  switch (vol.header.datatype) {
    case DataType::kInt16: decode<int16_t>(body, n, swap, vol.data.data()); break;
    case DataType::kInt32: decode<int32_t>(body, n, swap, vol.data.data()); break;
    case DataType::kFloat32: decode<float>(body, n, swap, vol.data.data()); break;
    case DataType::kFloat64: decode<double>(body, n, swap, vol.data.data()); break;
  }
  const double slope = vol.header.scl_slope;
  const double inter = vol.header.scl_inter;
  if (slope != 0.0 && std::isfinite(slope) && !(slope == 1.0 && inter == 0.0)) {
    for (double& v : vol.data) v = v * slope + inter;
  }
  return vol;
}

Fmri4D make_fmri(VolumeHeader header, std::vector<double> data) {
  header.validate();
  if (static_cast<int64_t>(data.size()) != header.total_voxels()) {
    throw DimensionError("fMRI data length does not match header dims");
  }
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw ValidationError("fMRI volume contains a non-finite value");
    }
  }
  return Fmri4D{std::move(header), std::move(data)};
}

AtlasVolume make_atlas(VolumeHeader header, std::vector<int32_t> labels) {
  header.validate();
  if (header.ndim != 3 && header.nt() != 1) {
    throw ValidationError("atlas must be a 3D volume");
  }
  if (static_cast<int64_t>(labels.size()) != header.voxels_per_volume()) {
    throw DimensionError("atlas label count does not match header dims");
  }
  int max_label = 0;
  std::set<int32_t> seen;
  for (int32_t l : labels) {
    if (l < 0) throw ValidationError("atlas contains a negative label");
    if (l > 0) seen.insert(l);
    max_label = std::max(max_label, l);
  }
  for (int l = 1; l <= max_label; ++l) {
    if (!seen.contains(l)) throw EmptyRoiError(l);
  }
  if (max_label == 0) throw ValidationError("atlas has no labeled voxels");
  AtlasVolume atlas;
  atlas.header = std::move(header);
  atlas.labels = std::move(labels);
  atlas.n_rois = max_label;
  return atlas;
}

Fmri4D read_fmri(const std::filesystem::path& path) {
  Volume v = read_volume(path);
  return make_fmri(std::move(v.header), std::move(v.data));
}

AtlasVolume read_atlas(const std::filesystem::path& path) {
  Volume v = read_volume(path);
  if (!is_integer(v.header.datatype)) {
    throw ValidationError(path.string() + ": atlas must have an integer datatype");
  }
  std::vector<int32_t> labels(v.data.size());
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    if (v.data[i] != std::floor(v.data[i])) {
      throw ValidationError(path.string() + ": scaled atlas has non-integer labels");
    }
    labels[i] = static_cast<int32_t>(v.data[i]);
  }
  return make_atlas(std::move(v.header), std::move(labels));
}

void write_volume(const Volume& volume, const std::filesystem::path& path) {
  write_file(encode_volume(volume.header, volume.data), path);
}

void write_volume(const Fmri4D& volume, const std::filesystem::path& path) {
  write_file(encode_volume(volume.header, volume.data), path);
}

void write_volume(const AtlasVolume& volume, const std::filesystem::path& path) {
  std::vector<double> data(volume.labels.begin(), volume.labels.end());
  write_file(encode_volume(volume.header, data), path);
}

}  // namespace awats
