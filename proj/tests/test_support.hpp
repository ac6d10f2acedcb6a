#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>
#include <vector>

#include "keyclip/types.hpp"

namespace keyclip::testing {

inline std::vector<float> random_unit(std::mt19937_64& rng, std::uint32_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0.0;
  for (auto& x : v) {
    x = g(rng);
    n += x * x;
  }
  n = std::sqrt(n);
  std::vector<float> out(dim);
  for (std::uint32_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / n);
  return out;
}

inline EmbeddingSequence random_sequence(std::size_t n, std::uint32_t dim, std::uint64_t seed,
                                         std::uint32_t h = 768, std::uint32_t w = 1024) {
  std::mt19937_64 rng(seed);
  EmbeddingSequence seq;
  seq.dim = dim;
  seq.fps = 1.0F;
  seq.src_height = h;
  seq.src_width = w;
  seq.label = "random-" + std::to_string(seed);
  for (std::size_t i = 0; i < n; ++i) {
    auto f = random_unit(rng, dim);
    seq.data.insert(seq.data.end(), f.begin(), f.end());
  }
  return seq;
}

/// Sequence whose frames are the given unit vectors.
inline EmbeddingSequence sequence_of(const std::vector<std::vector<float>>& frames, std::uint32_t h = 280,
                                     std::uint32_t w = 280) {
  EmbeddingSequence seq;
  seq.dim = static_cast<std::uint32_t>(frames.front().size());
  seq.src_height = h;
  seq.src_width = w;
  for (const auto& f : frames) seq.data.insert(seq.data.end(), f.begin(), f.end());
  return seq;
}

inline SimilarityCurve curve_of(std::vector<double> scores) { return SimilarityCurve{std::move(scores)}; }

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("keyclip-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
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

}  // namespace keyclip::testing
