#include "keyclip/relevance.hpp"

#include <cstdio>
#include <fstream>

namespace keyclip {

SimilarityCurve relevancy_scores(const EmbeddingSequence& seq, const QueryEmbedding& query) {
  if (query.dim() != seq.dim) {
    throw Error(ErrorCode::kDimMismatch, "query has D=" + std::to_string(query.dim()) +
                                             ", frames have D=" + std::to_string(seq.dim));
  }
  SimilarityCurve curve;
  curve.scores.reserve(seq.frame_count());
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    curve.scores.push_back(dot(seq.frame(i), query.vector));
  }
  return curve;
}

std::string curve_to_csv(const SimilarityCurve& curve) {
  std::string out = "index,score\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%#.9g\n", i, curve[i]);
    out += buf;
  }
  return out;
}

void export_curve_csv(const SimilarityCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  out << curve_to_csv(curve);
  if (!out) {
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
  }
}

}  // namespace keyclip
