#pragma once

// Core value types shared by every stage of the key-clip selection engine.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace keyclip {

enum class ErrorCode {
  kEmptySequence,
  kNormViolation,
  kDimMismatch,
  kInvalidConfig,
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedFile,
  kMalformed,
  kIoError,
  kKTooLarge,
  kBudgetViolation,
  kMissingQuery,
};

const char* to_string(ErrorCode code);

/// Exception carried by every fallible operation in the library. `index()` is
/// the offending frame for NormViolation and -1 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::int64_t index = -1);

  ErrorCode code() const noexcept { return code_; }
  std::int64_t index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::int64_t index_;
};

inline constexpr double kNormTolerance = 1e-4;
inline constexpr double kScoreTolerance = 1e-6;

/// N unit-norm frame embeddings of dimension D, stored row-major as 32-bit
/// floats, plus the source video metadata needed for token accounting.
struct EmbeddingSequence {
  std::uint32_t dim = 0;
  std::vector<float> data;  // frame_count() * dim values
  float fps = 1.0F;
  std::uint32_t src_height = 0;
  std::uint32_t src_width = 0;
  std::string label;

  std::size_t frame_count() const noexcept { return dim == 0 ? 0 : data.size() / dim; }

  std::span<const float> frame(std::size_t i) const noexcept {
    return {data.data() + i * dim, dim};
  }

  bool operator==(const EmbeddingSequence&) const = default;
};

struct QueryEmbedding {
  std::vector<float> vector;

  std::uint32_t dim() const noexcept { return static_cast<std::uint32_t>(vector.size()); }

  bool operator==(const QueryEmbedding&) const = default;
};

/// Per-frame relevancy of a sequence against one query.
struct SimilarityCurve {
  std::vector<double> scores;

  std::size_t size() const noexcept { return scores.size(); }
  double operator[](std::size_t i) const noexcept { return scores[i]; }
};

struct SelectionConfig {
  std::uint32_t k = 16;         // full-resolution frame budget
  std::uint32_t k_anchor = 16;  // anchor count cap
  double s_max = 2.0;
  double lambda_r = 0.5;
  double lambda_l = 0.05;
  double z = 392.0;  // pixels per visual token
  std::uint32_t grid = 28;
  std::uint64_t seed = 0;
  bool merge = true;

  /// Config with k_anchor tied to k, as used throughout the experiments.
  static SelectionConfig with_budget(std::uint32_t k) {
    SelectionConfig cfg;
    cfg.k = k;
    cfg.k_anchor = k;
    return cfg;
  }

  bool operator==(const SelectionConfig&) const = default;
};

struct KeyClip {
  std::size_t anchor = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  double scale = 1.0;
  std::uint32_t out_height = 0;
  std::uint32_t out_width = 0;
  std::uint64_t tokens = 0;

  std::size_t length() const noexcept { return end - start + 1; }
  bool overlaps(const KeyClip& other) const noexcept {
    return start <= other.end && other.start <= end;
  }

  bool operator==(const KeyClip&) const = default;
};

struct ClipPlan {
  std::string label;
  SelectionConfig config;
  std::vector<KeyClip> clips;  // sorted by start
  std::uint64_t total_tokens = 0;
  std::uint64_t budget_tokens = 0;

  bool operator==(const ClipPlan&) const = default;
};

// Core validation. Each throws keyclip::Error on the first violated invariant.
void validate_sequence(const EmbeddingSequence& seq);
void validate_query(const QueryEmbedding& query, std::uint32_t expected_dim);
void validate_config(const SelectionConfig& cfg);

/// Tokens for one encoded frame of the given dims, rounded up.
std::uint64_t frame_tokens(std::uint32_t height, std::uint32_t width, double z);

/// Dot product accumulated in double precision.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

}  // namespace keyclip
