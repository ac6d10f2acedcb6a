#pragma once

// Budget-exact key clip planning.
//
// Given anchors, each clip's length is chosen by exhaustive search over
// [1, l_max] of
//
//   objective(l) = S_C(l) - lambda_r * R_C(l) + lambda_l * l / l_max
//
// where S_C is the mean relevancy over the clip span and R_C the mean
// pairwise frame cosine. A clip of length l is rendered at scale
// s = max(1, sqrt(anchors * l / K)), which keeps anchors * l * (H/s)(W/s)
// within the budget of K full-resolution frames.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "keyclip/anchors.hpp"
#include "keyclip/types.hpp"

namespace keyclip {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  std::size_t length() const noexcept { return end - start + 1; }
  bool operator==(const Span&) const = default;
};

struct Dims {
  std::uint32_t height = 0;
  std::uint32_t width = 0;

  bool operator==(const Dims&) const = default;
};

struct ObjectiveTrace {
  struct Entry {
    std::size_t length = 0;
    double relevancy = 0.0;   // S_C
    double redundancy = 0.0;  // R_C
    double reward = 0.0;      // lambda_l * l / l_max
    double objective = 0.0;
  };
  std::vector<Entry> entries;  // entries[l - 1] describes length l
};

struct LengthChoice {
  std::size_t length = 1;
  ObjectiveTrace trace;
};

/// ceil(K * H * W / Z)
std::uint64_t budget_tokens(const SelectionConfig& cfg, std::uint32_t src_height, std::uint32_t src_width);
std::uint64_t budget_tokens(const SelectionConfig& cfg, const EmbeddingSequence& seq);

/// max(1, floor(s_max^2 * K / anchor_count)); anchor_count is the number of
/// anchors actually found, so scarce anchors earn longer clips.
std::size_t max_clip_length(const SelectionConfig& cfg, std::size_t anchor_count);

/// Window of exactly `length` frames around `anchor`, floor/ceil split so
/// even lengths extend one frame further right. Windows crossing the
/// sequence boundary are shifted inward, never truncated.
Span clip_span(std::size_t anchor, std::size_t length, std::size_t frame_count);

double clip_relevancy(const SimilarityCurve& curve, std::size_t start, std::size_t end);

/// Mean pairwise cosine over distinct frame pairs in the span; 0 for one frame.
double clip_redundancy(const EmbeddingSequence& seq, std::size_t start, std::size_t end);

/// Smallest maximizer of the clip objective over [1, l_max].
LengthChoice optimize_clip_length(const EmbeddingSequence& seq, const SimilarityCurve& curve, std::size_t anchor,
                                  const SelectionConfig& cfg, std::size_t l_max);

double scale_for_length(std::size_t length, std::uint32_t k, std::size_t anchor_count);

/// floor((src / s) / grid) * grid per side, at least one grid cell. A side
/// shorter than the grid keeps its native size.
Dims output_dims(std::uint32_t src_height, std::uint32_t src_width, double scale, std::uint32_t grid);

/// Unions overlapping clips that share output dims until no such pair is
/// left. The merged clip keeps the anchor with the higher relevancy and its
/// token cost is recomputed over the union span.
std::vector<KeyClip> merge_clips(std::vector<KeyClip> clips, const SimilarityCurve& curve, double z);

/// Builds clips for `anchors` with the given per-anchor lengths, then merges
/// when cfg.merge is set. Throws BudgetViolation if the result exceeds B.
ClipPlan assemble_plan(const EmbeddingSequence& seq, const SimilarityCurve& curve, const AnchorSet& anchors,
                       const std::vector<std::size_t>& lengths, const SelectionConfig& cfg);

/// Full pipeline from an existing relevancy curve. `threads` only changes
/// how per-anchor searches are scheduled, never the result.
ClipPlan plan_from_curve(const EmbeddingSequence& seq, const SimilarityCurve& curve, const SelectionConfig& cfg,
                         unsigned threads = 1);

ClipPlan plan(const EmbeddingSequence& seq, const QueryEmbedding& query, const SelectionConfig& cfg,
              unsigned threads = 1);

/// Frames encoded by the plan, counting a frame once per distinct output size.
std::size_t encoded_frame_count(const ClipPlan& plan);

/// Distinct frame indices touched by any clip, ascending.
std::vector<std::size_t> covered_frames(const ClipPlan& plan);

}  // namespace keyclip
