#pragma once

// Per-command run record written next to the command's outputs.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace awats {

constexpr const char* kArtifactVersion = "1.0.0";

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

class RunManifest {
 public:
  explicit RunManifest(std::string command);

  nlohmann::ordered_json& config() { return config_; }
  nlohmann::ordered_json& extra() { return extra_; }
  void set_seed(uint64_t seed) { seed_ = seed; }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::ordered_json to_json() const;

  // Serialises to a sibling temporary file and renames it over `path`.
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  uint64_t seed_ = 0;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json extra_ = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::system_clock::time_point started_at_;
};

}  // namespace awats
