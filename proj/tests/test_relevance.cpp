#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "keyclip/relevance.hpp"
#include "test_support.hpp"

using namespace keyclip;
using keyclip::testing::random_sequence;
using keyclip::testing::random_unit;
using keyclip::testing::sequence_of;
using keyclip::testing::TempDir;

TEST_CASE("relevancy of identical and orthogonal frames") {
  const auto seq = sequence_of({{0.6F, 0.8F}, {-0.8F, 0.6F}});
  const QueryEmbedding q{{0.6F, 0.8F}};
  const auto curve = relevancy_scores(seq, q);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(curve[1] == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("relevancy matches a scalar-product oracle on seeded 4-dim pairs") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_unit(rng, 4);
    const auto q = random_unit(rng, 4);
    long double oracle = 0.0L;
    for (int d = 3; d >= 0; --d) oracle += static_cast<long double>(f[d]) * static_cast<long double>(q[d]);
    const auto curve = relevancy_scores(sequence_of({f}), QueryEmbedding{q});
    CHECK(curve[0] == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-12));
  }
}

TEST_CASE("relevancy dimension mismatch") {
  const auto seq = random_sequence(3, 4, 1);
  try {
    relevancy_scores(seq, QueryEmbedding{{1.0F, 0.0F}});
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimMismatch);
  }
}

TEST_CASE("relevancy scores are bounded and permutation-equivariant") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + rng() % 30;
    const auto seq = random_sequence(n, 12, rng());
    const QueryEmbedding q{random_unit(rng, 12)};
    const auto curve = relevancy_scores(seq, q);
    for (double s : curve.scores) {
      CHECK(s >= -1.0 - kScoreTolerance);
      CHECK(s <= 1.0 + kScoreTolerance);
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EmbeddingSequence shuffled = seq;
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(seq.data.begin() + static_cast<std::ptrdiff_t>(perm[i] * seq.dim), seq.dim,
                  shuffled.data.begin() + static_cast<std::ptrdiff_t>(i * seq.dim));
    }
    const auto permuted = relevancy_scores(shuffled, q);
    for (std::size_t i = 0; i < n; ++i) CHECK(permuted[i] == curve[perm[i]]);
  }
}

TEST_CASE("curve CSV format") {
  CHECK(curve_to_csv(SimilarityCurve{{0.5}}) == "index,score\n0,0.500000000\n");

  const std::string csv = curve_to_csv(SimilarityCurve{{0.1, -0.25, 1.0}});
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv == "index,score\n0,0.100000000\n1,-0.250000000\n2,1.00000000\n");
}

TEST_CASE("export_curve_csv writes the file and reports IO errors") {
  TempDir dir;
  export_curve_csv(SimilarityCurve{{0.5}}, dir / "curve.csv");
  std::ifstream in(dir / "curve.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "index,score\n0,0.500000000\n");

  try {
    export_curve_csv(SimilarityCurve{{0.5}}, dir / "no-such-dir" / "curve.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}
