#include "keyclip/planner.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <tuple>
#include <utility>

#include "keyclip/relevance.hpp"

namespace keyclip {

std::uint64_t budget_tokens(const SelectionConfig& cfg, std::uint32_t src_height, std::uint32_t src_width) {
  const double pixels = static_cast<double>(cfg.k) * static_cast<double>(src_height) * static_cast<double>(src_width);
  return static_cast<std::uint64_t>(std::ceil(pixels / cfg.z));
}

std::uint64_t budget_tokens(const SelectionConfig& cfg, const EmbeddingSequence& seq) {
  return budget_tokens(cfg, seq.src_height, seq.src_width);
}

std::size_t max_clip_length(const SelectionConfig& cfg, std::size_t anchor_count) {
  const double count = static_cast<double>(std::max<std::size_t>(anchor_count, 1));
  const double raw = cfg.s_max * cfg.s_max * static_cast<double>(cfg.k) / count;
  // absorb representation error of s_max^2 for values meant to be integral
  const auto l = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::max<std::size_t>(1, l);
}

Span clip_span(std::size_t anchor, std::size_t length, std::size_t frame_count) {
  const std::size_t left = (length - 1) / 2;
  std::size_t start = anchor >= left ? anchor - left : 0;
  std::size_t end = start + length - 1;
  if (end >= frame_count) {
    end = frame_count - 1;
    start = end + 1 - length;
  }
  return {start, end};
}

double clip_relevancy(const SimilarityCurve& curve, std::size_t start, std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = start; i <= end; ++i) sum += curve[i];
  return sum / static_cast<double>(end - start + 1);
}

double clip_redundancy(const EmbeddingSequence& seq, std::size_t start, std::size_t end) {
  const std::size_t l = end - start + 1;
  if (l < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = start; i <= end; ++i) {
    for (std::size_t j = i + 1; j <= end; ++j) sum += dot(seq.frame(i), seq.frame(j));
  }
  return 2.0 * sum / (static_cast<double>(l) * static_cast<double>(l - 1));
}

LengthChoice optimize_clip_length(const EmbeddingSequence& seq, const SimilarityCurve& curve, std::size_t anchor,
                                  const SelectionConfig& cfg, std::size_t l_max) {
  const std::size_t n = curve.size();
  l_max = std::clamp<std::size_t>(l_max, 1, n);

  // Every candidate span lies inside this window, so pairwise cosines are
  // computed once.
  Span window = clip_span(anchor, l_max, n);
  for (std::size_t l = 1; l < l_max; ++l) {
    const Span s = clip_span(anchor, l, n);
    window.start = std::min(window.start, s.start);
    window.end = std::max(window.end, s.end);
  }
  const std::size_t w = window.length();
  std::vector<double> gram(w * w, 0.0);
  for (std::size_t a = 0; a < w; ++a) {
    for (std::size_t b = a + 1; b < w; ++b) {
      const double c = dot(seq.frame(window.start + a), seq.frame(window.start + b));
      gram[a * w + b] = c;
      gram[b * w + a] = c;
    }
  }

  LengthChoice choice;
  choice.trace.entries.reserve(l_max);
  double best = 0.0;
  for (std::size_t l = 1; l <= l_max; ++l) {
    const Span s = clip_span(anchor, l, n);
    ObjectiveTrace::Entry e;
    e.length = l;
    e.relevancy = clip_relevancy(curve, s.start, s.end);
    if (l >= 2) {
      double pair_sum = 0.0;
      for (std::size_t a = s.start; a <= s.end; ++a) {
        for (std::size_t b = a + 1; b <= s.end; ++b) {
          pair_sum += gram[(a - window.start) * w + (b - window.start)];
        }
      }
      e.redundancy = 2.0 * pair_sum / (static_cast<double>(l) * static_cast<double>(l - 1));
    }
    e.reward = cfg.lambda_l * static_cast<double>(l) / static_cast<double>(l_max);
    e.objective = e.relevancy - cfg.lambda_r * e.redundancy + e.reward;
    if (l == 1 || e.objective > best) {
      best = e.objective;
      choice.length = l;
    }
    choice.trace.entries.push_back(e);
  }
  return choice;
}

double scale_for_length(std::size_t length, std::uint32_t k, std::size_t anchor_count) {
  const double s = std::sqrt(static_cast<double>(anchor_count) * static_cast<double>(length) / static_cast<double>(k));
  return std::max(1.0, s);
}

Dims output_dims(std::uint32_t src_height, std::uint32_t src_width, double scale, std::uint32_t grid) {
  auto side = [&](std::uint32_t src) -> std::uint32_t {
    if (src < grid) return src;
    const auto cells = static_cast<std::uint32_t>(std::floor(static_cast<double>(src) / scale / grid));
    return std::max<std::uint32_t>(cells, 1) * grid;
  };
  return {side(src_height), side(src_width)};
}

namespace {

std::uint64_t clip_tokens(std::size_t length, Dims dims, double z) {
  return static_cast<std::uint64_t>(length) * frame_tokens(dims.height, dims.width, z);
}

bool same_dims(const KeyClip& a, const KeyClip& b) {
  return a.out_height == b.out_height && a.out_width == b.out_width;
}

void sort_clips(std::vector<KeyClip>& clips) {
  std::sort(clips.begin(), clips.end(), [](const KeyClip& a, const KeyClip& b) {
    return std::tie(a.start, a.end, a.anchor) < std::tie(b.start, b.end, b.anchor);
  });
}

struct Allowance {
  // Per-clip token allowance is K*H*W / (anchors * Z); compared without
  // dividing so integral inputs stay exact.
  double budget_pixels;
  double anchors_times_z;

  bool fits(std::uint64_t tokens) const {
    return static_cast<double>(tokens) * anchors_times_z <= budget_pixels;
  }
};

// Scale and dims for a clip of the requested length. Grid clamping can push
// a clip over its share of the budget; the larger side is then shrunk one
// grid step at a time, and if that is not enough the clip is shortened.
KeyClip build_clip(std::size_t anchor, std::size_t length, std::size_t anchor_count, const EmbeddingSequence& seq,
                   const SelectionConfig& cfg, const Allowance& allowance) {
  const std::size_t n = seq.frame_count();
  KeyClip fallback;
  for (std::size_t l = length; l >= 1; --l) {
    const double s = scale_for_length(l, cfg.k, anchor_count);
    Dims dims = output_dims(seq.src_height, seq.src_width, s, cfg.grid);
    while (!allowance.fits(clip_tokens(l, dims, cfg.z))) {
      std::uint32_t& side = dims.height >= dims.width ? dims.height : dims.width;
      if (side <= cfg.grid) break;
      side -= cfg.grid;
    }
    const Span span = clip_span(anchor, l, n);
    KeyClip clip{anchor, span.start, span.end, s, dims.height, dims.width, clip_tokens(l, dims, cfg.z)};
    if (allowance.fits(clip.tokens)) return clip;
    fallback = clip;
  }
  return fallback;
}

}  // namespace

std::vector<KeyClip> merge_clips(std::vector<KeyClip> clips, const SimilarityCurve& curve, double z) {
  sort_clips(clips);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < clips.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < clips.size() && !changed; ++j) {
        if (!same_dims(clips[i], clips[j]) || !clips[i].overlaps(clips[j])) continue;
        KeyClip& keep = clips[i];
        const KeyClip& other = clips[j];
        const bool other_wins =
            curve[other.anchor] > curve[keep.anchor] ||
            (curve[other.anchor] == curve[keep.anchor] && other.anchor < keep.anchor);
        if (other_wins) {
          keep.anchor = other.anchor;
          keep.scale = other.scale;
        }
        keep.start = std::min(keep.start, other.start);
        keep.end = std::max(keep.end, other.end);
        keep.tokens = clip_tokens(keep.length(), {keep.out_height, keep.out_width}, z);
        clips.erase(clips.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
      }
    }
  }
  sort_clips(clips);
  return clips;
}

ClipPlan assemble_plan(const EmbeddingSequence& seq, const SimilarityCurve& curve, const AnchorSet& anchors,
                       const std::vector<std::size_t>& lengths, const SelectionConfig& cfg) {
  if (lengths.size() != anchors.size()) {
    throw Error(ErrorCode::kDimMismatch, "one clip length is required per anchor");
  }
  ClipPlan out;
  out.label = seq.label;
  out.config = cfg;
  out.budget_tokens = budget_tokens(cfg, seq);

  const Allowance allowance{
      static_cast<double>(cfg.k) * static_cast<double>(seq.src_height) * static_cast<double>(seq.src_width),
      static_cast<double>(anchors.size()) * cfg.z};
  const std::size_t n = seq.frame_count();
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::size_t l = std::clamp<std::size_t>(lengths[i], 1, n);
    out.clips.push_back(build_clip(anchors.indices[i], l, anchors.size(), seq, cfg, allowance));
  }
  if (cfg.merge) {
    out.clips = merge_clips(std::move(out.clips), curve, cfg.z);
  } else {
    sort_clips(out.clips);
  }
  for (const auto& c : out.clips) out.total_tokens += c.tokens;
  if (out.total_tokens > out.budget_tokens) {
    throw Error(ErrorCode::kBudgetViolation, "plan uses " + std::to_string(out.total_tokens) + " tokens of " +
                                                 std::to_string(out.budget_tokens));
  }
  return out;
}

ClipPlan plan_from_curve(const EmbeddingSequence& seq, const SimilarityCurve& curve, const SelectionConfig& cfg,
                         unsigned threads) {
  validate_config(cfg);
  if (curve.size() != seq.frame_count()) {
    throw Error(ErrorCode::kDimMismatch, "curve length does not match frame count");
  }
  if (curve.size() == 0) {
    throw Error(ErrorCode::kEmptySequence, "sequence has no frames");
  }
  const AnchorSet anchors = select_anchors(curve, cfg);
  const std::size_t l_max = max_clip_length(cfg, anchors.size());

  std::vector<std::size_t> lengths(anchors.size(), 1);
  auto solve = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < anchors.size(); i += stride) {
      lengths[i] = optimize_clip_length(seq, curve, anchors.indices[i], cfg, l_max).length;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(anchors.size(), 1));
  if (workers == 1) {
    solve(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t t = 0; t < workers; ++t) jobs.push_back(std::async(std::launch::async, solve, t, workers));
    for (auto& j : jobs) j.get();
  }
  return assemble_plan(seq, curve, anchors, lengths, cfg);
}

ClipPlan plan(const EmbeddingSequence& seq, const QueryEmbedding& query, const SelectionConfig& cfg,
              unsigned threads) {
  validate_sequence(seq);
  validate_query(query, seq.dim);
  return plan_from_curve(seq, relevancy_scores(seq, query), cfg, threads);
}

std::size_t encoded_frame_count(const ClipPlan& plan) {
  std::set<std::tuple<std::size_t, std::uint32_t, std::uint32_t>> frames;
  for (const auto& c : plan.clips) {
    for (std::size_t i = c.start; i <= c.end; ++i) frames.emplace(i, c.out_height, c.out_width);
  }
  return frames.size();
}

std::vector<std::size_t> covered_frames(const ClipPlan& plan) {
  std::set<std::size_t> frames;
  for (const auto& c : plan.clips) {
    for (std::size_t i = c.start; i <= c.end; ++i) frames.insert(i);
  }
  return {frames.begin(), frames.end()};
}

}  // namespace keyclip
