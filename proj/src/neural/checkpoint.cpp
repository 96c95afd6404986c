#include "awats/neural/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "awats/errors.hpp"

namespace awats::nn {

namespace {

constexpr char kMagic[4] = {'A', 'W', 'N', 'N'};
constexpr uint32_t kVersion = 1;

template <typename U>
void put(std::ostream& out, U v) {
  uint8_t b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    b[i] = static_cast<uint8_t>(static_cast<uint64_t>(v) >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <typename U>
bool get(std::istream& in, U& v) {
  uint8_t b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) return false;
  uint64_t x = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) x |= static_cast<uint64_t>(b[i]) << (8 * i);
  v = static_cast<U>(x);
  return true;
}

void put_blob(std::ostream& out, const std::string& name, const float* data,
              std::size_t count) {
  put<uint32_t>(out, static_cast<uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<uint64_t>(out, count);
  for (std::size_t i = 0; i < count; ++i) {
    uint32_t bits;
    std::memcpy(&bits, data + i, 4);
    put<uint32_t>(out, bits);
  }
}

using BlobMap = std::map<std::string, std::vector<float>>;

std::size_t blob_size(const BlobMap& blobs, const std::string& name) {
  const auto it = blobs.find(name);
  if (it == blobs.end()) throw FormatError("checkpoint lacks blob " + name);
  return it->second.size();
}

}  // namespace

void save_checkpoint(Model<float>& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const ModelConfig& c = model.config();
  out.write(kMagic, 4);
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, static_cast<uint32_t>(c.mode));
  put<uint32_t>(out, static_cast<uint32_t>(c.q));
  put<uint32_t>(out, static_cast<uint32_t>(c.n_rois));
  put<uint32_t>(out, static_cast<uint32_t>(c.window));
  put<uint32_t>(out, static_cast<uint32_t>(c.n_classes));
  for (Param<float>* p : model.params()) {
    put_blob(out, p->name, p->value.data(), static_cast<std::size_t>(p->value.size()));
  }
  for (const Buffer<float>& b : model.buffers()) {
    put_blob(out, b.name, b.value->data(), static_cast<std::size_t>(b.value->size()));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Model<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + ": not an AWNN checkpoint");
  }
  uint32_t version = 0, mode = 0, q = 0, r = 0, w = 0, c = 0;
  if (!get(in, version) || !get(in, mode) || !get(in, q) || !get(in, r) ||
      !get(in, w) || !get(in, c)) {
    throw TruncationError(path.string() + ": truncated checkpoint header");
  }
  if (version != kVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " +
                      std::to_string(version));
  }
  if (mode > 1) throw FormatError(path.string() + ": bad mode flag");

  BlobMap blobs;
  uint32_t name_len = 0;
  while (get(in, name_len)) {
    std::string name(name_len, '\0');
    uint64_t count = 0;
    if (!in.read(name.data(), name_len) || !get(in, count)) {
      throw TruncationError(path.string() + ": truncated blob header");
    }
    std::vector<float> data(count);
    for (float& f : data) {
      uint32_t bits = 0;
      if (!get(in, bits)) throw TruncationError(path.string() + ": truncated blob " + name);
      std::memcpy(&f, &bits, 4);
    }
    blobs.emplace(std::move(name), std::move(data));
  }

  ModelConfig cfg;
  cfg.mode = static_cast<InputMode>(mode);
  cfg.q = static_cast<int>(q);
  cfg.n_rois = static_cast<int>(r);
  cfg.window = static_cast<int>(w);
  cfg.n_classes = static_cast<int>(c);
  if (cfg.mode == InputMode::kAwats) {
    cfg.per_roi_extractor = blobs.contains("extractor0.dense1.w");
    const std::string ext = cfg.per_roi_extractor ? "extractor0" : "extractor";
    cfg.extractor_hidden = static_cast<int>(blob_size(blobs, ext + ".dense1.b"));
  }
  cfg.conv_layers = 0;
  while (blobs.contains("conv" + std::to_string(cfg.conv_layers) + ".w")) ++cfg.conv_layers;
  cfg.lstm_layers = 0;
  while (blobs.contains("lstm" + std::to_string(cfg.lstm_layers) + ".wx")) ++cfg.lstm_layers;
  if (cfg.conv_layers == 0 || cfg.lstm_layers == 0) {
    throw FormatError(path.string() + ": checkpoint lacks conv or LSTM layers");
  }
  cfg.conv_filters = static_cast<int>(blob_size(blobs, "conv0.b"));
  cfg.lstm_hidden = static_cast<int>(blob_size(blobs, "lstm0.b") / 4);
  cfg.head_hidden = static_cast<int>(blob_size(blobs, "head.dense1.b"));

  Model<float> model(cfg);
  for (Param<float>* p : model.params()) {
    const auto it = blobs.find(p->name);
    if (it == blobs.end()) throw FormatError("checkpoint lacks blob " + p->name);
    if (static_cast<Eigen::Index>(it->second.size()) != p->value.size()) {
      throw FormatError("checkpoint blob " + p->name + " has the wrong size");
    }
    std::memcpy(p->value.data(), it->second.data(), it->second.size() * sizeof(float));
  }
  for (const Buffer<float>& b : model.buffers()) {
    const auto it = blobs.find(b.name);
    if (it == blobs.end()) throw FormatError("checkpoint lacks blob " + b.name);
    if (static_cast<Eigen::Index>(it->second.size()) != b.value->size()) {
      throw FormatError("checkpoint blob " + b.name + " has the wrong size");
    }
    std::memcpy(b.value->data(), it->second.data(), it->second.size() * sizeof(float));
  }
  return model;
}

}  // namespace awats::nn
