#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <json.hpp>

#include "ensprompt/orchestrator/config.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return ENSPROMPT_TEST_DATA_DIR; }
inline std::filesystem::path synthetic_dir() { return data_dir() / "synthetic"; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ensprompt-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
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

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// The synthetic 40-example config with artifacts redirected to `artifacts`.
inline ensprompt::RunConfig synthetic_config(const std::filesystem::path& artifacts) {
  auto doc = ensprompt::read_json_file(synthetic_dir() / "config.json");
  doc["artifact_dir"] = artifacts.string();
  return ensprompt::config_from_json(doc, synthetic_dir());
}

}  // namespace fixtures
