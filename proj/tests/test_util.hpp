#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

namespace testutil {

// Unique scratch path under the system temp dir, removed on destruction.
struct TempPath {
  std::filesystem::path path;

  explicit TempPath(const std::string& suffix = "") {
    static std::atomic<unsigned> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("drydown_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter.fetch_add(1)) + suffix);
  }
  TempPath(TempPath&& other) noexcept : path(std::move(other.path)) { other.path.clear(); }
  TempPath& operator=(TempPath&& other) noexcept {
    path = std::move(other.path);
    other.path.clear();
    return *this;
  }
  TempPath(const TempPath&) = delete;
  TempPath& operator=(const TempPath&) = delete;
  ~TempPath() {
    if (path.empty()) return;
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

inline TempPath write_file(const std::string& content, const std::string& suffix = ".csv") {
  TempPath tmp(suffix);
  std::ofstream out(tmp.path);
  out << content;
  return tmp;
}

}  // namespace testutil
