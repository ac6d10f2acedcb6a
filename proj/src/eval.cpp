#include "keyclip/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include <json.hpp>

#include "keyclip/planner.hpp"
#include "keyclip/serialize.hpp"

namespace keyclip {

std::string ground_truth_to_json(const GroundTruth& gt) {
  nlohmann::ordered_json j;
  j["event_centers"] = gt.event_centers;
  j["window"] = gt.window;
  return j.dump() + "\n";
}

GroundTruth ground_truth_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GroundTruth gt;
    gt.event_centers = j.at("event_centers").get<std::vector<std::size_t>>();
    gt.window = j.value("window", std::size_t{2});
    if (!std::is_sorted(gt.event_centers.begin(), gt.event_centers.end())) {
      throw Error(ErrorCode::kMalformed, "event centers must be sorted");
    }
    return gt;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("ground truth JSON: ") + e.what());
  }
}

SimilarityCurve synth_curve(std::size_t frame_count, const std::vector<std::size_t>& event_centers, double amp,
                            double width, double noise_sigma, std::uint64_t seed) {
  SimilarityCurve curve;
  curve.scores.assign(frame_count, 0.0);
  for (std::size_t c : event_centers) {
    for (std::size_t i = 0; i < frame_count; ++i) {
      const double d = static_cast<double>(i) - static_cast<double>(c);
      curve.scores[i] += amp * std::exp(-d * d / (2.0 * width * width));
    }
  }
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (auto& s : curve.scores) s += noise(rng);
  }
  for (auto& s : curve.scores) s = std::clamp(s, -1.0, 1.0);
  return curve;
}

SyntheticVideo synth_embeddings(const SimilarityCurve& curve, std::uint32_t dim, std::uint64_t seed,
                                std::uint32_t src_height, std::uint32_t src_width) {
  if (dim < 2) {
    throw Error(ErrorCode::kDimMismatch, "synthetic embeddings need D >= 2");
  }
  SyntheticVideo out;
  out.query.vector.assign(dim, 0.0F);
  out.query.vector[0] = 1.0F;

  auto& seq = out.sequence;
  seq.dim = dim;
  seq.fps = 1.0F;
  seq.src_height = src_height;
  seq.src_width = src_width;
  seq.label = "synthetic-" + std::to_string(seed);
  seq.data.reserve(curve.size() * dim);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> u(dim);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double r = std::clamp(curve[i], -1.0, 1.0);
    double norm = 0.0;
    while (norm < 1e-12) {
      u[0] = 0.0;
      norm = 0.0;
      for (std::uint32_t d = 1; d < dim; ++d) {
        u[d] = gauss(rng);
        norm += u[d] * u[d];
      }
    }
    norm = std::sqrt(norm);
    const double ortho = std::sqrt(std::max(0.0, 1.0 - r * r));
    seq.data.push_back(static_cast<float>(r));
    for (std::uint32_t d = 1; d < dim; ++d) seq.data.push_back(static_cast<float>(ortho * u[d] / norm));
  }
  return out;
}

std::vector<std::size_t> random_event_centers(std::size_t frame_count, std::size_t count,
                                              std::size_t min_separation, std::uint64_t seed) {
  count = std::min(count, frame_count);
  if (count == 0) return {};
  // Separation is dropped when the sequence is too short to honor it.
  if (min_separation * count > frame_count) min_separation = 0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, frame_count - 1);
  std::vector<std::size_t> centers;
  for (int attempt = 0; centers.size() < count; ++attempt) {
    const std::size_t c = pick(rng);
    const bool clear = std::all_of(centers.begin(), centers.end(), [&](std::size_t o) {
      const std::size_t gap = c > o ? c - o : o - c;
      return gap > 0 && (attempt > 10000 || gap >= min_separation);
    });
    if (clear) centers.push_back(c);
  }
  std::sort(centers.begin(), centers.end());
  return centers;
}

Coverage coverage(const std::vector<std::size_t>& frames, const std::vector<std::size_t>& anchors,
                  const GroundTruth& gt) {
  auto near = [&](std::size_t a, std::size_t b) { return (a > b ? a - b : b - a) <= gt.window; };
  Coverage out;
  if (!gt.event_centers.empty()) {
    std::size_t hit = 0;
    for (std::size_t c : gt.event_centers) {
      if (std::any_of(frames.begin(), frames.end(), [&](std::size_t f) { return near(f, c); })) ++hit;
    }
    out.event_coverage = static_cast<double>(hit) / static_cast<double>(gt.event_centers.size());
  }
  if (!anchors.empty()) {
    std::size_t hit = 0;
    for (std::size_t a : anchors) {
      if (std::any_of(gt.event_centers.begin(), gt.event_centers.end(), [&](std::size_t c) { return near(a, c); })) {
        ++hit;
      }
    }
    out.anchor_recall = static_cast<double>(hit) / static_cast<double>(anchors.size());
  }
  return out;
}

Coverage coverage(const ClipPlan& plan, const GroundTruth& gt) {
  std::vector<std::size_t> anchors;
  for (const auto& c : plan.clips) anchors.push_back(c.anchor);
  return coverage(covered_frames(plan), anchors, gt);
}

Coverage coverage(const FrameSelection& selection, const GroundTruth& gt) {
  return coverage(selection.indices, selection.indices, gt);
}

std::vector<TokenRow> token_report(const std::vector<std::pair<std::string, ClipPlan>>& plans,
                                   std::string_view baseline) {
  const ClipPlan* base = nullptr;
  for (const auto& [name, p] : plans) {
    if (name == baseline) base = &p;
  }
  if (base == nullptr) {
    throw Error(ErrorCode::kMalformed, "baseline policy '" + std::string(baseline) + "' not among the plans");
  }
  std::vector<TokenRow> rows;
  for (const auto& [name, p] : plans) {
    TokenRow r;
    r.policy = name;
    r.budget_tokens = p.budget_tokens;
    r.total_tokens = p.total_tokens;
    r.distinct_frames = covered_frames(p).size();
    r.delta_tokens = static_cast<std::int64_t>(p.total_tokens) - static_cast<std::int64_t>(base->total_tokens);
    r.delta_percent = base->total_tokens == 0
                          ? 0.0
                          : 100.0 * static_cast<double>(r.delta_tokens) / static_cast<double>(base->total_tokens);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_percent(double percent) {
  char buf[32];
  const double rounded = std::round(percent * 10.0) / 10.0;
  if (rounded == 0.0) return "0.0%";
  std::snprintf(buf, sizeof(buf), "%+.1f%%", rounded);
  return buf;
}

std::string token_report_csv(const std::vector<TokenRow>& rows) {
  std::string out = "policy,budget_tokens,total_tokens,distinct_frames,delta_tokens,delta_percent\n";
  for (const auto& r : rows) {
    out += r.policy + "," + std::to_string(r.budget_tokens) + "," + std::to_string(r.total_tokens) + "," +
           std::to_string(r.distinct_frames) + "," + std::to_string(r.delta_tokens) + "," +
           format_percent(r.delta_percent) + "\n";
  }
  return out;
}

std::string token_report_json(const std::vector<TokenRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["policy"] = r.policy;
    j["budget_tokens"] = r.budget_tokens;
    j["total_tokens"] = r.total_tokens;
    j["distinct_frames"] = r.distinct_frames;
    j["delta_tokens"] = r.delta_tokens;
    j["delta_percent"] = format_percent(r.delta_percent);
    arr.push_back(std::move(j));
  }
  return arr.dump() + "\n";
}

std::optional<Policy> parse_policy(std::string_view name) {
  if (name == "keyclips") return Policy::kKeyClips;
  if (name == "uniform") return Policy::kUniform;
  if (name == "topk") return Policy::kTopK;
  if (name == "its") return Policy::kIts;
  if (name == "watershed") return Policy::kWatershed;
  if (name == "uniform_clips") return Policy::kUniformClips;
  return std::nullopt;
}

const char* to_string(Policy policy) {
  switch (policy) {
    case Policy::kKeyClips: return "keyclips";
    case Policy::kUniform: return "uniform";
    case Policy::kTopK: return "topk";
    case Policy::kIts: return "its";
    case Policy::kWatershed: return "watershed";
    case Policy::kUniformClips: return "uniform_clips";
  }
  return "unknown";
}

namespace {

// Independent streams for event placement, curve noise and embeddings.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

SyntheticInstance make_instance(const SynthParams& params, std::uint64_t seed) {
  SyntheticInstance inst;
  const auto separation = static_cast<std::size_t>(std::ceil(4.0 * params.width));
  inst.truth.event_centers = random_event_centers(params.frame_count, params.events, separation, derive_seed(seed, 1));
  inst.truth.window = params.window;
  inst.curve = synth_curve(params.frame_count, inst.truth.event_centers, params.amp, params.width,
                           params.noise_sigma, derive_seed(seed, 2));
  inst.video = synth_embeddings(inst.curve, params.dim, derive_seed(seed, 3), params.src_height, params.src_width);
  inst.video.sequence.label = "synthetic-" + std::to_string(seed);
  return inst;
}

PolicyOutcome run_policy(Policy policy, const SyntheticInstance& instance, const SelectionConfig& cfg,
                         double its_alpha) {
  const auto& seq = instance.video.sequence;
  PolicyOutcome out;
  FrameSelection sel;
  std::size_t extension = 1;
  switch (policy) {
    case Policy::kKeyClips:
      out.plan = plan_from_curve(seq, instance.curve, cfg);
      for (const auto& c : out.plan.clips) out.anchors.push_back(c.anchor);
      out.metrics = coverage(covered_frames(out.plan), out.anchors, instance.truth);
      return out;
    case Policy::kUniform: sel = uniform_select(seq.frame_count(), cfg.k); break;
    case Policy::kTopK: sel = topk_select(instance.curve, cfg.k); break;
    case Policy::kIts: sel = its_select(instance.curve, cfg.k, its_alpha); break;
    case Policy::kWatershed: sel = watershed_select(instance.curve, cfg.k); break;
    case Policy::kUniformClips:
      sel = uniform_select(seq.frame_count(), cfg.k);
      extension = 2;
      break;
  }
  out.plan = selection_to_plan(sel, seq, cfg, extension);
  out.anchors = sel.indices;
  out.metrics = coverage(covered_frames(out.plan), out.anchors, instance.truth);
  return out;
}

namespace {

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

}  // namespace

EvalReport sweep(const SweepSpec& spec) {
  const std::size_t per_seed = spec.k_values.size() * spec.anchor_ratios.size() * spec.policies.size();
  std::vector<std::vector<RunRecord>> by_seed(spec.seeds.size());

  auto run_seed = [&](std::size_t s) {
    const std::uint64_t seed = spec.seeds[s];
    const SyntheticInstance inst = make_instance(spec.synth, seed);
    auto& records = by_seed[s];
    records.reserve(per_seed);
    for (std::uint32_t k : spec.k_values) {
      for (double ratio : spec.anchor_ratios) {
        SelectionConfig cfg = spec.base;
        cfg.k = k;
        cfg.k_anchor = static_cast<std::uint32_t>(std::max(1.0, std::round(ratio * static_cast<double>(k))));
        for (Policy policy : spec.policies) {
          const PolicyOutcome o = run_policy(policy, inst, cfg, spec.its_alpha);
          RunRecord r;
          r.policy = policy;
          r.k = k;
          r.anchor_ratio = ratio;
          r.seed = seed;
          r.metrics = o.metrics;
          r.total_tokens = o.plan.total_tokens;
          r.budget_tokens = o.plan.budget_tokens;
          r.distinct_frames = covered_frames(o.plan).size();
          records.push_back(r);
        }
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(spec.threads, 1, std::max<std::size_t>(spec.seeds.size(), 1));
  if (workers == 1) {
    for (std::size_t s = 0; s < spec.seeds.size(); ++s) run_seed(s);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t t = 0; t < workers; ++t) {
      jobs.push_back(std::async(std::launch::async, [&, t] {
        for (std::size_t s = t; s < spec.seeds.size(); s += workers) run_seed(s);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  EvalReport report;
  // Records are regrouped by configuration; within a group, seeds keep the
  // order they were given in, whatever the thread schedule was.
  for (std::size_t ki = 0; ki < spec.k_values.size(); ++ki) {
    for (std::size_t ri = 0; ri < spec.anchor_ratios.size(); ++ri) {
      for (std::size_t pi = 0; pi < spec.policies.size(); ++pi) {
        const std::size_t slot = (ki * spec.anchor_ratios.size() + ri) * spec.policies.size() + pi;
        std::vector<double> cov, rec, tok, frm;
        for (const auto& records : by_seed) {
          const RunRecord& r = records[slot];
          cov.push_back(r.metrics.event_coverage);
          rec.push_back(r.metrics.anchor_recall);
          tok.push_back(static_cast<double>(r.total_tokens));
          frm.push_back(static_cast<double>(r.distinct_frames));
        }
        SummaryRow row;
        row.policy = spec.policies[pi];
        row.k = spec.k_values[ki];
        row.anchor_ratio = spec.anchor_ratios[ri];
        row.runs = by_seed.size();
        row.coverage = mean_std(cov);
        row.recall = mean_std(rec);
        row.tokens = mean_std(tok);
        row.frames = mean_std(frm);
        report.summary.push_back(row);
      }
    }
  }
  for (std::size_t slot = 0; slot < per_seed; ++slot) {
    for (const auto& records : by_seed) report.runs.push_back(records[slot]);
  }
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out =
      "policy,k,anchor_ratio,runs,coverage_mean,coverage_std,recall_mean,recall_std,tokens_mean,tokens_std,"
      "frames_mean,frames_std\n";
  char buf[256];
  for (const auto& r : report.summary) {
    std::snprintf(buf, sizeof(buf), "%s,%u,%.4f,%zu,%.6f,%.6f,%.6f,%.6f,%.3f,%.3f,%.3f,%.3f\n", to_string(r.policy),
                  r.k, r.anchor_ratio, r.runs, r.coverage.mean, r.coverage.std, r.recall.mean, r.recall.std,
                  r.tokens.mean, r.tokens.std, r.frames.mean, r.frames.std);
    out += buf;
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  auto summary = nlohmann::ordered_json::array();
  auto ms = [](const MeanStd& m) { return nlohmann::ordered_json{{"mean", m.mean}, {"std", m.std}}; };
  for (const auto& r : report.summary) {
    nlohmann::ordered_json j;
    j["policy"] = to_string(r.policy);
    j["k"] = r.k;
    j["anchor_ratio"] = r.anchor_ratio;
    j["runs"] = r.runs;
    j["coverage"] = ms(r.coverage);
    j["recall"] = ms(r.recall);
    j["tokens"] = ms(r.tokens);
    j["frames"] = ms(r.frames);
    summary.push_back(std::move(j));
  }
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.runs) {
    nlohmann::ordered_json j;
    j["policy"] = to_string(r.policy);
    j["k"] = r.k;
    j["anchor_ratio"] = r.anchor_ratio;
    j["seed"] = r.seed;
    j["event_coverage"] = r.metrics.event_coverage;
    j["anchor_recall"] = r.metrics.anchor_recall;
    j["total_tokens"] = r.total_tokens;
    j["budget_tokens"] = r.budget_tokens;
    j["distinct_frames"] = r.distinct_frames;
    runs.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["summary"] = std::move(summary);
  out["runs"] = std::move(runs);
  return out.dump(2) + "\n";
}

SignTest sign_test_greater(const std::vector<double>& first, const std::vector<double>& second) {
  SignTest t;
  const std::size_t n = std::min(first.size(), second.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (first[i] > second[i]) {
      ++t.wins;
    } else if (first[i] < second[i]) {
      ++t.losses;
    } else {
      ++t.ties;
    }
  }
  // P(X >= wins) for X ~ Binomial(wins + losses, 1/2)
  const std::size_t trials = t.wins + t.losses;
  if (trials == 0) return t;
  double p = 0.0;
  for (std::size_t x = t.wins; x <= trials; ++x) {
    const double log_term = std::lgamma(static_cast<double>(trials) + 1.0) -
                            std::lgamma(static_cast<double>(x) + 1.0) -
                            std::lgamma(static_cast<double>(trials - x) + 1.0) -
                            static_cast<double>(trials) * std::log(2.0);
    p += std::exp(log_term);
  }
  t.p_value = std::min(1.0, p);
  return t;
}

}  // namespace keyclip
