#include "keyclip/types.hpp"

#include <cmath>

namespace keyclip {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kNormViolation: return "NormViolation";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kMalformed: return "Malformed";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kBudgetViolation: return "BudgetViolation";
    case ErrorCode::kMissingQuery: return "MissingQuery";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::int64_t index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), index_(index) {}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

namespace {

bool unit_norm(std::span<const float> v) {
  const double norm = std::sqrt(dot(v, v));
  return std::abs(norm - 1.0) <= kNormTolerance;
}

}  // namespace

void validate_sequence(const EmbeddingSequence& seq) {
  if (seq.dim == 0) {
    throw Error(ErrorCode::kDimMismatch, "embedding dimension must be at least 1");
  }
  if (seq.data.empty()) {
    throw Error(ErrorCode::kEmptySequence, "sequence has no frames");
  }
  if (seq.data.size() % seq.dim != 0) {
    throw Error(ErrorCode::kDimMismatch, "payload of " + std::to_string(seq.data.size()) +
                                             " values is not a multiple of D=" + std::to_string(seq.dim));
  }
  if (!(seq.fps > 0.0F) || !std::isfinite(seq.fps)) {
    throw Error(ErrorCode::kMalformed, "fps must be positive");
  }
  if (seq.src_height == 0 || seq.src_width == 0) {
    throw Error(ErrorCode::kMalformed, "source frame dims must be positive");
  }
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    if (!unit_norm(seq.frame(i))) {
      throw Error(ErrorCode::kNormViolation, "frame " + std::to_string(i) + " is not unit norm",
                  static_cast<std::int64_t>(i));
    }
  }
}

void validate_query(const QueryEmbedding& query, std::uint32_t expected_dim) {
  if (query.dim() != expected_dim) {
    throw Error(ErrorCode::kDimMismatch, "query has D=" + std::to_string(query.dim()) +
                                             ", sequence has D=" + std::to_string(expected_dim));
  }
  if (!unit_norm(query.vector)) {
    throw Error(ErrorCode::kNormViolation, "query embedding is not unit norm");
  }
}

void validate_config(const SelectionConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (cfg.k < 1) fail("k must be >= 1");
  if (cfg.k_anchor < 1) fail("k_anchor must be >= 1");
  if (!(cfg.s_max >= 1.0) || !std::isfinite(cfg.s_max)) fail("s_max must be >= 1");
  if (!(cfg.lambda_r >= 0.0) || !std::isfinite(cfg.lambda_r)) fail("lambda_r must be >= 0");
  if (!(cfg.lambda_l >= 0.0) || !std::isfinite(cfg.lambda_l)) fail("lambda_l must be >= 0");
  if (!(cfg.z > 0.0) || !std::isfinite(cfg.z)) fail("z must be > 0");
  if (cfg.grid < 1) fail("grid must be >= 1");
}

std::uint64_t frame_tokens(std::uint32_t height, std::uint32_t width, double z) {
  const double pixels = static_cast<double>(height) * static_cast<double>(width);
  return static_cast<std::uint64_t>(std::ceil(pixels / z));
}

}  // namespace keyclip
