#pragma once

// Synthetic ground truth, coverage metrics, token accounting and policy
// sweeps for comparing key clip plans against frame selectors.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "keyclip/baselines.hpp"
#include "keyclip/types.hpp"

namespace keyclip {

struct GroundTruth {
  std::vector<std::size_t> event_centers;  // ascending
  std::size_t window = 2;                  // +/- frames that count as a hit

  bool operator==(const GroundTruth&) const = default;
};

std::string ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(std::string_view text);

/// Gaussian bumps amp * exp(-(i - c)^2 / (2 width^2)) on a zero baseline,
/// plus seeded N(0, noise_sigma) noise, clipped to [-1, 1].
SimilarityCurve synth_curve(std::size_t frame_count, const std::vector<std::size_t>& event_centers, double amp,
                            double width, double noise_sigma, std::uint64_t seed);

struct SyntheticVideo {
  EmbeddingSequence sequence;
  QueryEmbedding query;
};

/// Query is the first basis vector; frame i is r_i * q + sqrt(1 - r_i^2) * u_i
/// with u_i a seeded random unit vector orthogonal to q, so the relevancy
/// of frame i reproduces r_i.
SyntheticVideo synth_embeddings(const SimilarityCurve& curve, std::uint32_t dim, std::uint64_t seed,
                                std::uint32_t src_height = 768, std::uint32_t src_width = 1024);

/// `count` distinct ascending centers in [0, frame_count), at least
/// `min_separation` apart whenever that is feasible.
std::vector<std::size_t> random_event_centers(std::size_t frame_count, std::size_t count,
                                              std::size_t min_separation, std::uint64_t seed);

struct Coverage {
  double event_coverage = 0.0;  // events with a selected frame within the window
  double anchor_recall = 0.0;   // anchors within the window of some event
};

/// Empty denominators give 0.
Coverage coverage(const std::vector<std::size_t>& frames, const std::vector<std::size_t>& anchors,
                  const GroundTruth& gt);
Coverage coverage(const ClipPlan& plan, const GroundTruth& gt);
Coverage coverage(const FrameSelection& selection, const GroundTruth& gt);

struct TokenRow {
  std::string policy;
  std::uint64_t budget_tokens = 0;
  std::uint64_t total_tokens = 0;
  std::size_t distinct_frames = 0;
  std::int64_t delta_tokens = 0;  // against the baseline policy
  double delta_percent = 0.0;
};

/// One row per named plan; deltas are relative to the plan named `baseline`.
std::vector<TokenRow> token_report(const std::vector<std::pair<std::string, ClipPlan>>& plans,
                                   std::string_view baseline);
std::string format_percent(double percent);
std::string token_report_csv(const std::vector<TokenRow>& rows);
std::string token_report_json(const std::vector<TokenRow>& rows);

enum class Policy { kKeyClips, kUniform, kTopK, kIts, kWatershed, kUniformClips };

std::optional<Policy> parse_policy(std::string_view name);
const char* to_string(Policy policy);

struct SynthParams {
  std::size_t frame_count = 1800;
  std::size_t events = 3;
  double amp = 0.6;
  double width = 10.0;
  double noise_sigma = 0.05;
  std::uint32_t dim = 16;
  std::size_t window = 2;
  std::uint32_t src_height = 768;
  std::uint32_t src_width = 1024;
};

struct SyntheticInstance {
  SimilarityCurve curve;
  SyntheticVideo video;
  GroundTruth truth;
};

SyntheticInstance make_instance(const SynthParams& params, std::uint64_t seed);

struct PolicyOutcome {
  ClipPlan plan;
  std::vector<std::size_t> anchors;
  Coverage metrics;
};

/// Runs one policy on one instance. `cfg.k` is the frame budget; only the
/// key clip policy reads the anchor settings.
PolicyOutcome run_policy(Policy policy, const SyntheticInstance& instance, const SelectionConfig& cfg,
                         double its_alpha = kDefaultItsAlpha);

struct SweepSpec {
  std::vector<Policy> policies;
  std::vector<std::uint32_t> k_values;
  std::vector<double> anchor_ratios;  // k_anchor = max(1, round(ratio * k))
  std::vector<std::uint64_t> seeds;
  SynthParams synth;
  SelectionConfig base;  // k and k_anchor are overwritten per run
  double its_alpha = kDefaultItsAlpha;
  unsigned threads = 1;
};

struct RunRecord {
  Policy policy = Policy::kKeyClips;
  std::uint32_t k = 0;
  double anchor_ratio = 1.0;
  std::uint64_t seed = 0;
  Coverage metrics;
  std::uint64_t total_tokens = 0;
  std::uint64_t budget_tokens = 0;
  std::size_t distinct_frames = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single run
};

struct SummaryRow {
  Policy policy = Policy::kKeyClips;
  std::uint32_t k = 0;
  double anchor_ratio = 1.0;
  std::size_t runs = 0;
  MeanStd coverage;
  MeanStd recall;
  MeanStd tokens;
  MeanStd frames;
};

struct EvalReport {
  std::vector<RunRecord> runs;  // ordered by (k, ratio, policy, seed) in SweepSpec order
  std::vector<SummaryRow> summary;
};

EvalReport sweep(const SweepSpec& spec);
std::string report_csv(const EvalReport& report);
std::string report_json(const EvalReport& report);

struct SignTest {
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  double p_value = 1.0;  // one-sided, H1: first sample tends to be larger
};

SignTest sign_test_greater(const std::vector<double>& first, const std::vector<double>& second);

}  // namespace keyclip
