#pragma once

#include <filesystem>
#include <string>

#include "keyclip/types.hpp"

namespace keyclip {

/// Cosine relevancy of every frame against the query. Inputs are unit norm,
/// so this is the plain dot product, accumulated in double.
SimilarityCurve relevancy_scores(const EmbeddingSequence& seq, const QueryEmbedding& query);

/// "index,score" CSV, one row per frame, scores with 9 significant digits.
std::string curve_to_csv(const SimilarityCurve& curve);
void export_curve_csv(const SimilarityCurve& curve, const std::filesystem::path& path);

}  // namespace keyclip
