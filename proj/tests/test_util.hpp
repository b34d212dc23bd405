#ifndef ADFUSE_TEST_UTIL_HPP
#define ADFUSE_TEST_UTIL_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <limits>
#include <string>
#include <unistd.h>

#include "adfuse/rng.hpp"
#include "adfuse/sketch.hpp"

namespace adfuse::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(ADFUSE_FIXTURES) / name;
}

inline FeatureVector random_vector(Eigen::Index n, SplitMix64& rng, double scale = 1.0) {
  FeatureVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

template <typename A, typename B>
double max_abs_diff(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return static_cast<double>((a - b).cwiseAbs().maxCoeff());
}

/// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("adfuse_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace adfuse::testing

#endif  // ADFUSE_TEST_UTIL_HPP
