#include "keyclip/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "keyclip/anchors.hpp"

namespace keyclip {

std::optional<BaselineMethod> parse_baseline_method(std::string_view name) {
  if (name == "uniform") return BaselineMethod::kUniform;
  if (name == "topk") return BaselineMethod::kTopK;
  if (name == "its") return BaselineMethod::kIts;
  if (name == "watershed") return BaselineMethod::kWatershed;
  return std::nullopt;
}

const char* to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::kUniform: return "uniform";
    case BaselineMethod::kTopK: return "topk";
    case BaselineMethod::kIts: return "its";
    case BaselineMethod::kWatershed: return "watershed";
  }
  return "unknown";
}

namespace {

FrameSelection all_frames(std::size_t n) {
  FrameSelection sel;
  sel.indices.resize(n);
  std::iota(sel.indices.begin(), sel.indices.end(), 0);
  return sel;
}

}  // namespace

FrameSelection uniform_select(std::size_t frame_count, std::size_t k) {
  if (k >= frame_count) return all_frames(frame_count);
  FrameSelection sel;
  for (std::size_t j = 0; j < k; ++j) {
    sel.indices.push_back(((2 * j + 1) * frame_count) / (2 * k));
  }
  return sel;
}

FrameSelection topk_select(const SimilarityCurve& curve, std::size_t k) {
  if (k >= curve.size()) return all_frames(curve.size());
  std::vector<std::size_t> order(curve.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return curve[a] > curve[b]; });
  FrameSelection sel;
  sel.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(sel.indices.begin(), sel.indices.end());
  return sel;
}

FrameSelection its_select(const SimilarityCurve& curve, std::size_t k, double alpha) {
  const std::size_t n = curve.size();
  if (k == 0 || n == 0) return {};
  if (k >= n) return all_frames(n);

  const auto [lo, hi] = std::minmax_element(curve.scores.begin(), curve.scores.end());
  const double range = *hi - *lo;
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += range > 0.0 ? std::pow((curve[i] - *lo) / range, alpha) : 1.0;
    cumulative[i] = total;
  }

  std::vector<bool> taken(n, false);
  FrameSelection sel;
  std::size_t cursor = 0;
  for (std::size_t j = 0; j < k; ++j) {
    // first i with cumulative[i] / total > (j + 0.5) / k, compared without
    // division so a flat curve lands exactly on the uniform midpoints
    const double target = static_cast<double>(2 * j + 1) * total;
    while (cursor < n && !(2.0 * static_cast<double>(k) * cumulative[cursor] > target)) ++cursor;
    std::size_t pick = std::min(cursor, n - 1);
    while (pick < n && taken[pick]) ++pick;
    if (pick == n) {
      pick = std::min(cursor, n - 1);
      while (taken[pick]) --pick;
    }
    taken[pick] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (taken[i]) sel.indices.push_back(i);
  }
  return sel;
}

FrameSelection watershed_select(const SimilarityCurve& curve, std::size_t k) {
  SelectionConfig cfg;
  cfg.k = static_cast<std::uint32_t>(std::max<std::size_t>(k, 1));
  cfg.k_anchor = cfg.k;
  return FrameSelection{select_anchors(curve, cfg).indices};
}

FrameSelection run_baseline(BaselineMethod method, const SimilarityCurve& curve, std::size_t k, double alpha) {
  switch (method) {
    case BaselineMethod::kUniform: return uniform_select(curve.size(), k);
    case BaselineMethod::kTopK: return topk_select(curve, k);
    case BaselineMethod::kIts: return its_select(curve, k, alpha);
    case BaselineMethod::kWatershed: return watershed_select(curve, k);
  }
  return {};
}

std::vector<Span> augment_to_clips(const FrameSelection& selection, std::size_t per_frame_extension,
                                   std::size_t frame_count) {
  std::vector<Span> spans;
  const std::size_t length = std::clamp<std::size_t>(per_frame_extension, 1, std::max<std::size_t>(frame_count, 1));
  for (std::size_t idx : selection.indices) {
    spans.push_back(clip_span(idx, length, frame_count));
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  std::vector<Span> merged;
  for (const Span& s : spans) {
    if (!merged.empty() && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

ClipPlan selection_to_plan(const FrameSelection& selection, const EmbeddingSequence& seq,
                           const SelectionConfig& cfg, std::size_t per_frame_extension) {
  ClipPlan out;
  out.label = seq.label;
  out.config = cfg;
  out.budget_tokens = budget_tokens(cfg, seq);
  const Dims dims = output_dims(seq.src_height, seq.src_width, 1.0, cfg.grid);
  const std::uint64_t per_frame = frame_tokens(dims.height, dims.width, cfg.z);
  std::size_t next = 0;
  for (const Span& s : augment_to_clips(selection, per_frame_extension, seq.frame_count())) {
    // report the first selected frame inside the span as its anchor
    while (next < selection.size() && selection.indices[next] < s.start) ++next;
    const std::size_t anchor = next < selection.size() ? selection.indices[next] : s.start;
    KeyClip c{anchor, s.start, s.end, 1.0, dims.height, dims.width, per_frame * s.length()};
    out.total_tokens += c.tokens;
    out.clips.push_back(c);
  }
  return out;
}

}  // namespace keyclip
