#pragma once

// Watershed-style anchor selection on a 1-D relevancy curve.
//
// Valleys split the curve into basins, each basin contributes its peak as a
// candidate, and when there are more candidates than the anchor cap the
// candidates are clustered by temporal index with 1-D k-means. Each cluster
// then contributes its highest scoring member.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "keyclip/types.hpp"

namespace keyclip {

/// Strictly increasing frame indices.
struct AnchorSet {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  bool operator==(const AnchorSet&) const = default;
};

/// Interior i is a valley iff s[i] < s[i-1] and s[i] <= s[i+1], so a flat
/// minimum yields only its first index. Endpoints are never valleys.
std::vector<std::size_t> find_valleys(const SimilarityCurve& curve);

/// Per-basin argmax (earliest on ties). Basins are delimited by consecutive
/// valleys, which belong to both neighbours; the first basin starts at 0 and
/// the last ends at N-1. Result is ascending and deduplicated.
std::vector<std::size_t> basin_peaks(const SimilarityCurve& curve, const std::vector<std::size_t>& valleys);

/// Lloyd's algorithm on scalar indices. Centroids start at the (j+0.5)/k
/// quantiles of `points` (ascending), distance ties go to the lower centroid,
/// an emptied cluster is reseeded with the point farthest from its centroid,
/// and iteration stops at an assignment fixpoint or after 100 rounds.
/// Clusters come back ordered by centroid. The procedure is deterministic;
/// `seed` is accepted for interface stability and does not affect the result.
std::vector<std::vector<std::size_t>> kmeans_1d(const std::vector<std::size_t>& points, std::size_t k,
                                                std::uint64_t seed = 0);

inline constexpr int kKMeansMaxIterations = 100;

AnchorSet select_anchors(const SimilarityCurve& curve, const SelectionConfig& cfg);

}  // namespace keyclip
