#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "keyclip/baselines.hpp"
#include "keyclip/container.hpp"
#include "keyclip/serialize.hpp"
#include "test_support.hpp"

using namespace keyclip;
using keyclip::testing::TempDir;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result run(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + KEYCLIP_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// N frames all equal to the query, so the relevancy curve is flat.
Container flat_container(std::size_t n) {
  Container c;
  c.sequence.dim = 2;
  c.sequence.src_height = 768;
  c.sequence.src_width = 1024;
  for (std::size_t i = 0; i < n; ++i) c.sequence.data.insert(c.sequence.data.end(), {0.6F, 0.8F});
  c.query = QueryEmbedding{{0.6F, 0.8F}};
  return c;
}

}  // namespace

TEST_CASE("cli: synth then select with defaults") {
  TempDir dir;
  REQUIRE(run(dir, "synth --out " + q(dir / "v.f2ce") + " --frames 300 --seed 4").code == 0);
  const Result r = run(dir, "select --input " + q(dir / "v.f2ce"));
  CHECK(r.code == 0);
  const ClipPlan p = plan_from_json(r.out);
  CHECK(p.config.k == 16);
  CHECK(p.config.k_anchor == 16);
  CHECK(p.total_tokens <= p.budget_tokens);
  CHECK(p.budget_tokens == 32100);
}

TEST_CASE("cli: usage errors exit 2") {
  TempDir dir;
  REQUIRE(run(dir, "synth --out " + q(dir / "v.f2ce") + " --frames 50").code == 0);
  CHECK(run(dir, "select --input " + q(dir / "v.f2ce") + " --k 0").code == 2);
  CHECK(run(dir, "baseline --input " + q(dir / "v.f2ce") + " --method qframe").code == 2);
  CHECK(run(dir, "select").code == 2);
  CHECK(run(dir, "no-such-command").code == 2);
}

TEST_CASE("cli: data errors exit 1 with a message") {
  TempDir dir;
  Container c = flat_container(10);
  c.query.reset();
  write_container(c, dir / "noq.f2ce");
  const Result r = run(dir, "select --input " + q(dir / "noq.f2ce"));
  CHECK(r.code == 1);
  CHECK(r.err.find("missing query embedding in") != std::string::npos);

  std::ofstream(dir / "bad.f2ce", std::ios::binary) << "XXXXjunk";
  const Result bad = run(dir, "select --input " + q(dir / "bad.f2ce"));
  CHECK(bad.code == 1);
  CHECK(bad.err.find("BadMagic") != std::string::npos);
}

TEST_CASE("cli: uniform baseline") {
  TempDir dir;
  write_container(flat_container(100), dir / "flat.f2ce.json");
  const Result r = run(dir, "baseline --input " + q(dir / "flat.f2ce.json") + " --method uniform --k 4");
  CHECK(r.code == 0);
  std::string method;
  CHECK(selection_from_json(r.out, &method).indices == std::vector<std::size_t>{12, 37, 62, 87});
  CHECK(method == "uniform");

  const Result its = run(dir, "baseline --input " + q(dir / "flat.f2ce.json") + " --method its --k 4");
  CHECK(its.code == 0);
  CHECK(selection_from_json(its.out).indices == std::vector<std::size_t>{12, 37, 62, 87});
}

TEST_CASE("cli: synth is byte-identical for the same seed") {
  TempDir dir;
  const std::string args = " --frames 200 --seed 9 --events 2";
  REQUIRE(run(dir, "synth --out " + q(dir / "a.f2ce") + " --gt-out " + q(dir / "a.gt.json") + args).code == 0);
  REQUIRE(run(dir, "synth --out " + q(dir / "b.f2ce") + " --gt-out " + q(dir / "b.gt.json") + args).code == 0);
  CHECK(slurp(dir / "a.f2ce") == slurp(dir / "b.f2ce"));
  CHECK(slurp(dir / "a.gt.json") == slurp(dir / "b.gt.json"));
  CHECK(read_container(dir / "a.f2ce").query.has_value());
}

TEST_CASE("cli: eval of a selection against planted events") {
  TempDir dir;
  REQUIRE(run(dir, "synth --out " + q(dir / "v.f2ce") + " --gt-out " + q(dir / "gt.json") +
                       " --frames 100 --centers 10 50")
              .code == 0);
  std::ofstream(dir / "sel.json") << selection_to_json("manual", FrameSelection{{11, 80}});
  const Result r = run(dir, "eval --input " + q(dir / "sel.json") + " --gt " + q(dir / "gt.json"));
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["event_coverage"].get<double>() == 0.5);
  CHECK(j["anchor_recall"].get<double>() == 0.5);
}

TEST_CASE("cli: curve export") {
  TempDir dir;
  write_container(flat_container(3), dir / "flat.f2ce");
  const Result r = run(dir, "curve --input " + q(dir / "flat.f2ce"));
  CHECK(r.code == 0);
  CHECK(r.out.rfind("index,score\n0,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
}

TEST_CASE("cli: merging never costs tokens") {
  TempDir dir;
  REQUIRE(run(dir, "synth --out " + q(dir / "v.f2ce") + " --frames 120 --events 6 --seed 2").code == 0);
  REQUIRE(run(dir, "select --input " + q(dir / "v.f2ce") + " --no-merge --out " + q(dir / "raw.json")).code == 0);
  REQUIRE(run(dir, "select --input " + q(dir / "v.f2ce") + " --out " + q(dir / "merged.json")).code == 0);
  const Result r = run(dir, "tokens --json --plan raw=" + q(dir / "raw.json") + " --plan merged=" +
                                q(dir / "merged.json"));
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["delta_tokens"].get<long>() == 0);
  CHECK(j[1]["delta_tokens"].get<long>() <= 0);
}

TEST_CASE("cli: select output is independent of the thread count") {
  TempDir dir;
  REQUIRE(run(dir, "synth --out " + q(dir / "v.f2ce") + " --frames 500 --seed 11").code == 0);
  const Result one = run(dir, "select --input " + q(dir / "v.f2ce") + " --threads 1");
  const Result four = run(dir, "select --input " + q(dir / "v.f2ce") + " --threads 4");
  CHECK(one.code == 0);
  CHECK(one.out == four.out);
}

TEST_CASE("cli: sweep") {
  TempDir dir;
  const Result r = run(dir, "sweep --policies keyclips uniform --ks 8 --seeds 3 --frames 300");
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
  CHECK(run(dir, "sweep --policies nonsense").code == 2);
}
