#pragma once

// Frame selectors used as comparison points for key clip planning.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keyclip/planner.hpp"
#include "keyclip/types.hpp"

namespace keyclip {

/// Strictly increasing, in-range frame indices.
struct FrameSelection {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  bool operator==(const FrameSelection&) const = default;
};

enum class BaselineMethod { kUniform, kTopK, kIts, kWatershed };

std::optional<BaselineMethod> parse_baseline_method(std::string_view name);
const char* to_string(BaselineMethod method);

inline constexpr double kDefaultItsAlpha = 2.5;

/// Midpoints floor((j + 0.5) * N / K); all frames when K >= N.
FrameSelection uniform_select(std::size_t frame_count, std::size_t k);

/// K highest scores, earlier index first on ties, returned in temporal order.
FrameSelection topk_select(const SimilarityCurve& curve, std::size_t k);

/// Deterministic inverse transform sampling. Weights are min-max normalized
/// scores raised to `alpha` (uniform for a flat curve); quantile (j + 0.5)/K
/// maps to the first frame whose cumulative weight exceeds it, and a frame
/// already taken advances to the next free one. With a flat curve the result
/// is exactly uniform_select.
FrameSelection its_select(const SimilarityCurve& curve, std::size_t k, double alpha = kDefaultItsAlpha);

/// Watershed anchors with the anchor cap set to K.
FrameSelection watershed_select(const SimilarityCurve& curve, std::size_t k);

FrameSelection run_baseline(BaselineMethod method, const SimilarityCurve& curve, std::size_t k,
                            double alpha = kDefaultItsAlpha);

/// Turns every selected frame into a `per_frame_extension`-frame window and
/// unions windows that share a frame.
std::vector<Span> augment_to_clips(const FrameSelection& selection, std::size_t per_frame_extension,
                                   std::size_t frame_count);

/// A selection expressed as a plan of full-resolution clips (spans from
/// augment_to_clips), for token accounting next to key clip plans.
ClipPlan selection_to_plan(const FrameSelection& selection, const EmbeddingSequence& seq,
                           const SelectionConfig& cfg, std::size_t per_frame_extension = 1);

}  // namespace keyclip
