#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "gevk/embedding.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("gevk-" + tag + "-" + std::to_string(rd()));
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

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline gevk::EmbeddingMatrix random_matrix(std::size_t rows, std::size_t dims, std::uint64_t seed,
                                           const std::string& prefix = "row", double scale = 1.0,
                                           double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(shift, scale);
  std::vector<float> values(rows * dims);
  for (auto& v : values) v = static_cast<float>(nd(rng));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows; ++i) ids.push_back(prefix + std::to_string(i));
  return gevk::EmbeddingMatrix(rows, dims, std::move(values), std::move(ids));
}

}  // namespace testing
