// keyclip: command-line front end for key clip planning, baseline selectors,
// synthetic data and evaluation.
//
// Exit codes: 0 success, 1 data errors, 2 usage errors. Diagnostics go to
// stderr; machine-readable output goes to stdout or --out.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "keyclip/baselines.hpp"
#include "keyclip/container.hpp"
#include "keyclip/eval.hpp"
#include "keyclip/planner.hpp"
#include "keyclip/relevance.hpp"
#include "keyclip/serialize.hpp"

namespace {

using namespace keyclip;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + out_path);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + out_path);
}

Container load_validated(const std::string& path) {
  Container c = read_container(path);
  validate_sequence(c.sequence);
  if (c.query) validate_query(*c.query, c.sequence.dim);
  return c;
}

// ---------------------------------------------------------------------------

struct SelectArgs {
  std::string input;
  std::string out;
  std::uint32_t k = 16;
  std::uint32_t k_anchor = 0;  // 0 means "same as k"
  SelectionConfig cfg;
  bool no_merge = false;
  unsigned threads = 1;
};

void add_config_flags(CLI::App* cmd, SelectArgs& a) {
  cmd->add_option("--k", a.k, "Full-resolution frame budget")->check(CLI::PositiveNumber);
  cmd->add_option("--k-anchor", a.k_anchor, "Anchor count (default: k)")->check(CLI::PositiveNumber);
  cmd->add_option("--s-max", a.cfg.s_max, "Maximum downscale factor")->check(CLI::Range(1.0, 1e6));
  cmd->add_option("--lambda-r", a.cfg.lambda_r, "Redundancy weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda-l", a.cfg.lambda_l, "Clip length reward weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--z", a.cfg.z, "Pixels per token")->check(CLI::PositiveNumber);
  cmd->add_option("--grid", a.cfg.grid, "Output dims granularity in pixels")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.cfg.seed, "Seed for randomized steps");
  cmd->add_flag("--no-merge", a.no_merge, "Keep overlapping equal-resolution clips separate");
}

SelectionConfig resolve_config(const SelectArgs& a) {
  SelectionConfig cfg = a.cfg;
  cfg.k = a.k;
  cfg.k_anchor = a.k_anchor == 0 ? a.k : a.k_anchor;
  cfg.merge = !a.no_merge;
  return cfg;
}

int run_select(const SelectArgs& a) {
  Container c = load_validated(a.input);
  if (!c.query) throw Error(ErrorCode::kMissingQuery, "missing query embedding in " + a.input);
  emit(a.out, plan_to_json(plan(c.sequence, *c.query, resolve_config(a), a.threads)));
  return 0;
}

// ---------------------------------------------------------------------------

struct BaselineArgs {
  std::string input;
  std::string out;
  std::string method;
  std::uint32_t k = 16;
  double alpha = kDefaultItsAlpha;
};

int run_baseline_cmd(const BaselineArgs& a) {
  const auto method = parse_baseline_method(a.method);
  if (!method) throw UsageError("unsupported method '" + a.method + "'");
  Container c = load_validated(a.input);
  if (!c.query) throw Error(ErrorCode::kMissingQuery, "missing query embedding in " + a.input);
  const auto curve = relevancy_scores(c.sequence, *c.query);
  emit(a.out, selection_to_json(to_string(*method), run_baseline(*method, curve, a.k, a.alpha)));
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string gt_out;
  std::size_t frames = 1800;
  std::size_t events = 3;
  std::vector<std::size_t> centers;
  double amp = 0.6;
  double bump_width = 10.0;
  double noise = 0.05;
  std::uint32_t dim = 16;
  std::uint64_t seed = 0;
  std::uint32_t src_height = 768;
  std::uint32_t src_width = 1024;
  std::size_t window = 2;
  std::string label;
};

int run_synth(const SynthArgs& a) {
  SynthParams p;
  p.frame_count = a.frames;
  p.events = a.events;
  p.amp = a.amp;
  p.width = a.bump_width;
  p.noise_sigma = a.noise;
  p.dim = a.dim;
  p.window = a.window;
  p.src_height = a.src_height;
  p.src_width = a.src_width;

  SyntheticInstance inst;
  if (a.centers.empty()) {
    inst = make_instance(p, a.seed);
  } else {
    for (std::size_t c : a.centers) {
      if (c >= a.frames) throw UsageError("event center " + std::to_string(c) + " is out of range");
    }
    inst.truth.event_centers = a.centers;
    std::sort(inst.truth.event_centers.begin(), inst.truth.event_centers.end());
    inst.truth.window = a.window;
    inst.curve = synth_curve(a.frames, inst.truth.event_centers, a.amp, a.bump_width, a.noise, a.seed);
    inst.video = synth_embeddings(inst.curve, a.dim, a.seed + 1, a.src_height, a.src_width);
  }
  if (!a.label.empty()) inst.video.sequence.label = a.label;

  Container c{inst.video.sequence, inst.video.query};
  write_container(c, a.out);
  if (!a.gt_out.empty()) emit(a.gt_out, ground_truth_to_json(inst.truth));
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string input;
  std::string gt;
  std::string out;
  long window = -1;
};

int run_eval(const EvalArgs& a) {
  const std::string text = read_text(a.input);
  GroundTruth gt = ground_truth_from_json(read_text(a.gt));
  if (a.window >= 0) gt.window = static_cast<std::size_t>(a.window);

  Coverage cov;
  if (text.find("\"clips\"") != std::string::npos) {
    cov = coverage(plan_from_json(text), gt);
  } else {
    cov = coverage(selection_from_json(text), gt);
  }
  emit(a.out, "{\"event_coverage\":" + format_real(cov.event_coverage) +
                  ",\"anchor_recall\":" + format_real(cov.anchor_recall) + "}\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct CurveArgs {
  std::string input;
  std::string out;
};

int run_curve(const CurveArgs& a) {
  Container c = load_validated(a.input);
  if (!c.query) throw Error(ErrorCode::kMissingQuery, "missing query embedding in " + a.input);
  const auto curve = relevancy_scores(c.sequence, *c.query);
  if (a.out.empty()) {
    emit("", curve_to_csv(curve));
  } else {
    export_curve_csv(curve, a.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TokensArgs {
  std::vector<std::string> plans;  // name=path
  std::string baseline;
  std::string out;
  bool json = false;
};

int run_tokens(const TokensArgs& a) {
  std::vector<std::pair<std::string, ClipPlan>> plans;
  for (const auto& entry : a.plans) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--plan expects NAME=PATH, got '" + entry + "'");
    plans.emplace_back(entry.substr(0, eq), plan_from_json(read_text(entry.substr(eq + 1))));
  }
  const std::string baseline = a.baseline.empty() ? plans.front().first : a.baseline;
  const auto rows = token_report(plans, baseline);
  emit(a.out, a.json ? token_report_json(rows) : token_report_csv(rows));
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> policies{"keyclips", "uniform", "topk", "its", "watershed"};
  std::vector<std::uint32_t> k_values{8, 16, 32};
  std::vector<double> ratios{1.0};
  std::size_t seeds = 20;
  std::uint64_t seed_start = 0;
  SynthArgs synth;
  SelectArgs select;
  std::string format = "csv";
  std::string out;
  unsigned threads = 1;
};

int run_sweep(const SweepArgs& a) {
  SweepSpec spec;
  for (const auto& name : a.policies) {
    const auto p = parse_policy(name);
    if (!p) throw UsageError("unknown policy '" + name + "'");
    spec.policies.push_back(*p);
  }
  spec.k_values = a.k_values;
  spec.anchor_ratios = a.ratios;
  for (std::size_t i = 0; i < a.seeds; ++i) spec.seeds.push_back(a.seed_start + i);
  spec.synth.frame_count = a.synth.frames;
  spec.synth.events = a.synth.events;
  spec.synth.amp = a.synth.amp;
  spec.synth.width = a.synth.bump_width;
  spec.synth.noise_sigma = a.synth.noise;
  spec.synth.dim = a.synth.dim;
  spec.synth.window = a.synth.window;
  spec.base = resolve_config(a.select);
  spec.threads = a.threads;
  const EvalReport report = sweep(spec);
  emit(a.out, a.format == "json" ? report_json(report) : report_csv(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-aware key clip selection under a visual token budget"};
  app.require_subcommand(1);

  SelectArgs select;
  auto* select_cmd = app.add_subcommand("select", "Plan key clips for a container with a query");
  select_cmd->add_option("--input,-i", select.input, "Input .f2ce or .f2ce.json")->required();
  select_cmd->add_option("--out,-o", select.out, "Output plan JSON (default: stdout)");
  select_cmd->add_option("--threads", select.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_config_flags(select_cmd, select);

  BaselineArgs baseline;
  auto* baseline_cmd = app.add_subcommand("baseline", "Run a baseline frame selector");
  baseline_cmd->add_option("--input,-i", baseline.input, "Input .f2ce or .f2ce.json")->required();
  baseline_cmd->add_option("--out,-o", baseline.out, "Output selection JSON (default: stdout)");
  baseline_cmd->add_option("--method", baseline.method, "uniform | topk | its | watershed")->required();
  baseline_cmd->add_option("--k", baseline.k, "Frames to select")->check(CLI::PositiveNumber);
  baseline_cmd->add_option("--alpha", baseline.alpha, "ITS weight exponent")->check(CLI::NonNegativeNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic container with planted events");
  synth_cmd->add_option("--out,-o", synth.out, "Output .f2ce or .f2ce.json")->required();
  synth_cmd->add_option("--gt-out", synth.gt_out, "Ground truth JSON output");
  synth_cmd->add_option("--frames,-n", synth.frames, "Frame count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--events", synth.events, "Number of random events");
  synth_cmd->add_option("--centers", synth.centers, "Explicit event centers (overrides --events)");
  synth_cmd->add_option("--amp", synth.amp, "Event amplitude");
  synth_cmd->add_option("--bump-width", synth.bump_width, "Event width in frames")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth.noise, "Noise sigma")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--dim", synth.dim, "Embedding dimension")->check(CLI::Range(2U, 1U << 20));
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("--src-height", synth.src_height, "Source frame height")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--src-width", synth.src_width, "Source frame width")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--window", synth.window, "Ground truth hit window (+/- frames)");
  synth_cmd->add_option("--label", synth.label, "Sequence label");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Coverage of a plan or selection against ground truth");
  eval_cmd->add_option("--input,-i", eval.input, "Plan or selection JSON")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground truth JSON")->required();
  eval_cmd->add_option("--window", eval.window, "Override the ground truth window")->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--out,-o", eval.out, "Output JSON (default: stdout)");

  CurveArgs curve;
  auto* curve_cmd = app.add_subcommand("curve", "Export the relevancy curve as CSV");
  curve_cmd->add_option("--input,-i", curve.input, "Input .f2ce or .f2ce.json")->required();
  curve_cmd->add_option("--out,-o", curve.out, "Output CSV (default: stdout)");

  TokensArgs tokens;
  auto* tokens_cmd = app.add_subcommand("tokens", "Token accounting across plans");
  tokens_cmd->add_option("--plan", tokens.plans, "NAME=PATH of a plan JSON (repeatable)")->required();
  tokens_cmd->add_option("--baseline", tokens.baseline, "Name of the reference plan (default: first)");
  tokens_cmd->add_flag("--json", tokens.json, "Emit JSON instead of CSV");
  tokens_cmd->add_option("--out,-o", tokens.out, "Output file (default: stdout)");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Compare policies over seeded synthetic instances");
  sweep_cmd->add_option("--policies", sweep_args.policies, "keyclips uniform topk its watershed uniform_clips");
  sweep_cmd->add_option("--ks", sweep_args.k_values, "Frame budgets")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--ratios", sweep_args.ratios, "K_anchor / K ratios")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed-start", sweep_args.seed_start, "First seed");
  sweep_cmd->add_option("--frames,-n", sweep_args.synth.frames, "Frame count")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--events", sweep_args.synth.events, "Events per instance");
  sweep_cmd->add_option("--amp", sweep_args.synth.amp, "Event amplitude");
  sweep_cmd->add_option("--bump-width", sweep_args.synth.bump_width, "Event width")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--noise", sweep_args.synth.noise, "Noise sigma")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--dim", sweep_args.synth.dim, "Embedding dimension")->check(CLI::Range(2U, 1U << 20));
  sweep_cmd->add_option("--window", sweep_args.synth.window, "Hit window (+/- frames)");
  sweep_cmd->add_option("--threads", sweep_args.threads, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--format", sweep_args.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--out,-o", sweep_args.out, "Output file (default: stdout)");
  sweep_cmd->add_option("--s-max", sweep_args.select.cfg.s_max, "Maximum downscale factor")
      ->check(CLI::Range(1.0, 1e6));
  sweep_cmd->add_option("--lambda-r", sweep_args.select.cfg.lambda_r, "Redundancy weight")
      ->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--lambda-l", sweep_args.select.cfg.lambda_l, "Length reward weight")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*select_cmd) return run_select(select);
    if (*baseline_cmd) return run_baseline_cmd(baseline);
    if (*synth_cmd) return run_synth(synth);
    if (*eval_cmd) return run_eval(eval);
    if (*curve_cmd) return run_curve(curve);
    if (*tokens_cmd) return run_tokens(tokens);
    if (*sweep_cmd) return run_sweep(sweep_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
