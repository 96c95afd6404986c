#include "awats/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include "awats/errors.hpp"

namespace awats {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    const std::streamsize n = in.gcount();
    if (n > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(n));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)),
      start_(std::chrono::steady_clock::now()),
      started_at_(std::chrono::system_clock::now()) {}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.emplace_back(path.string(), sha256_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back(path.string());
}

nlohmann::ordered_json RunManifest::to_json() const {
  const std::time_t t = std::chrono::system_clock::to_time_t(started_at_);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();

  nlohmann::ordered_json j;
  j["command"] = command_;
  j["artifact_version"] = kArtifactVersion;
  j["seed"] = seed_;
  j["config"] = config_;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [p, digest] : inputs_) {
    j["inputs"].push_back({{"path", p}, {"sha256", digest}});
  }
  j["outputs"] = outputs_;
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  j["started_at"] = stamp;
  j["wall_seconds"] = seconds;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << to_json().dump(2) << '\n';
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace awats
