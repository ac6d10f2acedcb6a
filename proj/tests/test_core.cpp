#include <doctest.h>

#include <fstream>
#include <random>

#include "keyclip/container.hpp"
#include "keyclip/types.hpp"
#include "test_support.hpp"

using namespace keyclip;
using keyclip::testing::random_sequence;
using keyclip::testing::random_unit;
using keyclip::testing::TempDir;

TEST_CASE("validate_sequence accepts unit-norm frames") {
  CHECK_NOTHROW(validate_sequence(random_sequence(3, 8, 1)));
}

TEST_CASE("validate_sequence reports the offending frame") {
  auto seq = random_sequence(4, 8, 2);
  for (std::size_t d = 0; d < seq.dim; ++d) seq.data[2 * seq.dim + d] *= 0.5F;
  try {
    validate_sequence(seq);
    FAIL("expected NormViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNormViolation);
    CHECK(e.index() == 2);
  }
}

TEST_CASE("validate_sequence rejects empty and ragged payloads") {
  EmbeddingSequence seq;
  seq.dim = 4;
  seq.src_height = seq.src_width = 10;
  try {
    validate_sequence(seq);
    FAIL("expected EmptySequence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptySequence);
  }
  seq.data = {1.0F, 0.0F, 0.0F};
  try {
    validate_sequence(seq);
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimMismatch);
  }
}

TEST_CASE("validate_sequence norm tolerance boundary") {
  // Accepts exactly the vectors whose norm is within 1e-4 of 1.
  EmbeddingSequence seq;
  seq.dim = 1;
  seq.src_height = seq.src_width = 28;
  for (double norm : {1.0 - 0.9e-4, 1.0 + 0.9e-4}) {
    seq.data = {static_cast<float>(norm)};
    CHECK_NOTHROW(validate_sequence(seq));
  }
  for (double norm : {1.0 - 1.2e-4, 1.0 + 1.2e-4, 0.0}) {
    seq.data = {static_cast<float>(norm)};
    CHECK_THROWS_AS(validate_sequence(seq), Error);
  }
}

TEST_CASE("validate_sequence rejects bad metadata") {
  auto seq = random_sequence(2, 4, 3);
  seq.fps = 0.0F;
  CHECK_THROWS_AS(validate_sequence(seq), Error);
  seq.fps = 1.0F;
  seq.src_width = 0;
  CHECK_THROWS_AS(validate_sequence(seq), Error);
}

TEST_CASE("validate_query checks dimension and norm") {
  QueryEmbedding q{{1.0F, 0.0F}};
  CHECK_NOTHROW(validate_query(q, 2));
  CHECK_THROWS_AS(validate_query(q, 3), Error);
  q.vector = {0.5F, 0.0F};
  CHECK_THROWS_AS(validate_query(q, 2), Error);
}

TEST_CASE("validate_config enforces the documented bounds") {
  SelectionConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));
  CHECK(cfg.s_max == 2.0);
  CHECK(cfg.lambda_r == 0.5);
  CHECK(cfg.lambda_l == 0.05);
  CHECK(cfg.z == 392.0);
  CHECK(cfg.grid == 28);
  CHECK(cfg.merge);

  auto bad = cfg;
  bad.k = 0;
  CHECK_THROWS_AS(validate_config(bad), Error);
  bad = cfg;
  bad.s_max = 0.5;
  CHECK_THROWS_AS(validate_config(bad), Error);
  bad = cfg;
  bad.lambda_r = -1.0;
  CHECK_THROWS_AS(validate_config(bad), Error);
}

TEST_CASE("frame_tokens rounds up") {
  CHECK(frame_tokens(28, 28, 392.0) == 2);
  CHECK(frame_tokens(28, 14, 392.0) == 1);
  CHECK(frame_tokens(10, 10, 392.0) == 1);
  CHECK(frame_tokens(280, 280, 392.0) == 200);
}

namespace {

Container sample_container(std::uint64_t seed, std::size_t n, std::uint32_t dim, bool with_query) {
  Container c;
  c.sequence = random_sequence(n, dim, seed);
  c.sequence.fps = 29.97F;
  c.sequence.label = "clip-\xc3\xa9-" + std::to_string(seed);
  if (with_query) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    c.query = QueryEmbedding{random_unit(rng, dim)};
  }
  return c;
}

}  // namespace

TEST_CASE("container 2x4 round trip re-serializes to identical bytes") {
  const auto c = sample_container(11, 2, 4, true);
  const auto bytes = encode_container(c);
  // magic, version, N, D, fps, height, width, has_query, label_len, label,
  // query, frames
  CHECK(bytes.size() == 4 + 4 + 4 + 4 + 4 + 4 + 4 + 1 + 2 + c.sequence.label.size() + 4 * 4 + 2 * 4 * 4);
  const auto back = decode_container(bytes);
  CHECK(back == c);
  CHECK(encode_container(back) == bytes);
}

TEST_CASE("container header is little-endian") {
  const auto bytes = encode_container(sample_container(1, 3, 2, false));
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "F2CE");
  CHECK(bytes[4] == 1);  // version
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 3);  // N
  CHECK(bytes[12] == 2);  // D
  CHECK(bytes[28] == 0);  // has_query
}

TEST_CASE("container round trip property over seeded containers") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    const std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng() % 33);
    const auto c = sample_container(rng(), n, dim, rng() % 2 == 0);
    const auto bytes = encode_container(c);
    CHECK(decode_container(bytes) == c);
    CHECK(decode_container_json(encode_container_json(c)) == c);
  }
}

TEST_CASE("container read errors") {
  auto bytes = encode_container(sample_container(5, 3, 4, true));

  SUBCASE("bad magic") {
    auto bad = bytes;
    std::fill(bad.begin(), bad.begin() + 4, static_cast<std::uint8_t>('X'));
    try {
      decode_container(bad);
      FAIL("expected BadMagic");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBadMagic);
    }
  }
  SUBCASE("unsupported version") {
    auto bad = bytes;
    bad[4] = 2;
    try {
      decode_container(bad);
      FAIL("expected UnsupportedVersion");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnsupportedVersion);
    }
  }
  SUBCASE("truncated mid-payload") {
    auto bad = bytes;
    bad.resize(bad.size() - 7);
    try {
      decode_container(bad);
      FAIL("expected TruncatedFile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kTruncatedFile);
    }
  }
  SUBCASE("truncated inside the header") {
    auto bad = std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10);
    try {
      decode_container(bad);
      FAIL("expected TruncatedFile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kTruncatedFile);
    }
  }
  SUBCASE("trailing bytes") {
    auto bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_container(bad), Error);
  }
}

TEST_CASE("container files pick the format from the extension") {
  TempDir dir;
  const auto c = sample_container(9, 5, 6, true);
  for (const char* name : {"a.f2ce", "a.f2ce.json"}) {
    write_container(c, dir / name);
    CHECK(read_container(dir / name) == c);
  }
  CHECK(is_json_container_path("x.f2ce.json"));
  CHECK_FALSE(is_json_container_path("x.f2ce"));

  std::ofstream(dir / "bad.f2ce", std::ios::binary) << "XXXX";
  try {
    read_container(dir / "bad.f2ce");
    FAIL("expected BadMagic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadMagic);
  }
  CHECK_THROWS_AS(read_container(dir / "missing.f2ce"), Error);
}
