#include "awats/resampling.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "awats/errors.hpp"
#include "awats/kernels.hpp"

namespace awats {

namespace {

constexpr char kCacheMagic[4] = {'A', 'W', 'R', 'T'};
constexpr uint32_t kCacheVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  const uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                        static_cast<uint8_t>(v >> 16),
                        static_cast<uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw TruncationError("AWRT cache truncated in header");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

}  // namespace

void resample_into(std::span<const double> v, std::span<double> out) {
  if (v.empty()) throw DomainError("cannot resample an empty vector");
  const auto p = static_cast<int64_t>(v.size());
  const auto q = static_cast<int64_t>(out.size());
  for (int64_t i = 1; i <= q; ++i) {
    // Position i*p/q kept as an exact rational: whole part j, remainder rem.
    const int64_t num = i * p;
    const int64_t j = num / q;
    const int64_t rem = num % q;
    double value;
    if (rem == 0) {
      value = v[static_cast<std::size_t>(j - 1)];
    } else {
      const int64_t lo = std::max<int64_t>(j, 1);
      const int64_t hi = std::min<int64_t>(j + 1, p);
      if (lo == hi) {
        value = v[static_cast<std::size_t>(lo - 1)];
      } else {
        const double vj = v[static_cast<std::size_t>(lo - 1)];
        const double vk = v[static_cast<std::size_t>(hi - 1)];
        const double frac = static_cast<double>(rem) / static_cast<double>(q);
        value = vj + (vk - vj) * frac;
      }
    }
    out[static_cast<std::size_t>(i - 1)] = value;
  }
}

std::vector<double> resample_vector(std::span<const double> v, int q) {
  if (q < 1) throw DomainError("resample size must be positive");
  std::vector<double> out(static_cast<std::size_t>(q));
  resample_into(v, out);
  return out;
}

ReprTensor build_repr_tensor(const Fmri4D& fmri,
                             const std::vector<RoiIndex>& rois, int q) {
  if (q < 2) throw ConfigError("resample size q must be >= 2");
  check_grid(fmri, rois);
  ReprTensor out;
  out.q = q;
  kernels::omp::build_repr(fmri, rois, out);
  return out;
}

void write_repr_cache(const ReprTensor& tensor,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kCacheMagic, 4);
  put_u32(out, kCacheVersion);
  put_u32(out, static_cast<uint32_t>(tensor.n_rois));
  put_u32(out, static_cast<uint32_t>(tensor.n_trs));
  put_u32(out, static_cast<uint32_t>(tensor.q));
  for (double v : tensor.values) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ReprTensor read_repr_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw FormatError(path.string() + ": not an AWRT cache");
  }
  const uint32_t version = get_u32(in);
  if (version != kCacheVersion) {
    throw FormatError(path.string() + ": unsupported AWRT version " +
                      std::to_string(version));
  }
  ReprTensor t;
  t.n_rois = static_cast<int>(get_u32(in));
  t.n_trs = get_u32(in);
  t.q = static_cast<int>(get_u32(in));
  if (t.n_rois < 1 || t.n_trs < 1 || t.q < 2) {
    throw FormatError(path.string() + ": invalid AWRT shape");
  }
  t.values.resize(static_cast<std::size_t>(t.n_rois) *
                  static_cast<std::size_t>(t.n_trs) *
                  static_cast<std::size_t>(t.width()));
  for (double& v : t.values) {
    const uint32_t bits = get_u32(in);
    float f;
    std::memcpy(&f, &bits, 4);
    v = f;
  }
  return t;
}

void write_repr_csv(const ReprTensor& tensor,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "roi_id,tr";
  const char axes[3] = {'x', 'y', 'z'};
  for (int a = 0; a < 3; ++a) {
    for (int k = 1; k <= tensor.q; ++k) out << ',' << axes[a] << k;
  }
  out << '\n';
  out.precision(9);
  for (int r = 0; r < tensor.n_rois; ++r) {
    for (int64_t t = 0; t < tensor.n_trs; ++t) {
      out << r + 1 << ',' << t;
      for (double v : tensor.at(r, t)) out << ',' << v;
      out << '\n';
    }
  }
}

}  // namespace awats
