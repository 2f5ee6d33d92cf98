#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "omnisketch/oracle.hpp"
#include "omnisketch/s0_sketch.hpp"
#include "test_support.hpp"

using namespace omnisketch;
using testing_support::query_from;
using testing_support::uniform_stream;

namespace {

// Picks `count` values of attribute `a` whose columns differ pairwise in every row.
auto separated_values(const S0Sketch& sk, std::size_t a, std::size_t count) -> std::vector<AttributeValue> {
  std::vector<AttributeValue> out;
  for (AttributeValue v = 1; out.size() < count; ++v) {
    bool clash = false;
    for (auto u : out)
      for (std::size_t j = 0; j < sk.depth(); ++j) clash = clash || sk.column(a, j, u) == sk.column(a, j, v);
    if (!clash) out.push_back(v);
  }
  return out;
}

}  // namespace

TEST(S0Dimensions, FrozenValues) {
  const auto dims = s0_dimensions(0.1, 0.1);
  EXPECT_EQ(dims.width, 29u);
  EXPECT_EQ(dims.depth, 3u);
  // independent evaluation
  EXPECT_EQ(dims.width, 1 + static_cast<std::size_t>(std::ceil(std::numbers::e / 0.1)));
  EXPECT_EQ(dims.depth, static_cast<std::size_t>(std::ceil(std::log(10.0))));
}

TEST(S0Dimensions, RejectsBoundaries) {
  EXPECT_THROW(S0Sketch(2, 1.0, 0.1, 0), Error);
  EXPECT_THROW(S0Sketch(2, 0.1, 0.0, 0), Error);
  try {
    (void)s0_dimensions(1.0, 0.5);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_epsilon_delta);
  }
}

TEST(S0Sketch, EmptySketchEstimatesZero) {
  S0Sketch sk(3, 0.1, 0.1, 1);
  Query q{{{0, Equality{4}}, {2, Equality{1}}}};
  EXPECT_EQ(sk.estimate_min(q).value, 0.0);
  EXPECT_EQ(sk.estimate_cap(q).value, 0.0);
}

TEST(S0Sketch, SingleRecordFound) {
  S0Sketch sk(2, 0.1, 0.1, 1);
  sk.insert(Record{RecordId{0}, {5, 9}});
  EXPECT_GE(sk.estimate_cap(Query{{{0, Equality{5}}, {1, Equality{9}}}}).value, 1.0);
}

TEST(S0Sketch, SameValuesTwiceGrowListsByTwo) {
  S0Sketch sk(2, 0.1, 0.1, 1);
  sk.insert(Record{RecordId{0}, {5, 9}});
  sk.insert(Record{RecordId{1}, {5, 9}});
  for (std::size_t j = 0; j < sk.depth(); ++j) {
    EXPECT_EQ(sk.cell(0, j, sk.column(0, j, 5)).size(), 2u);
    EXPECT_EQ(sk.cell(1, j, sk.column(1, j, 9)).size(), 2u);
  }
}

TEST(S0Sketch, ListMassConservation) {
  auto stream = uniform_stream(1000, 3, 50, 4);
  S0Sketch sk(3, 0.1, 0.1, 2);
  for (const auto& r : stream) sk.insert(r);
  for (std::size_t a = 0; a < 3; ++a) {
    std::size_t mass = 0;
    for (std::size_t j = 0; j < sk.depth(); ++j)
      for (std::size_t c = 1; c <= sk.width(); ++c) mass += sk.cell(a, j, c).size();
    EXPECT_EQ(mass, sk.depth() * 1000);
  }
  EXPECT_EQ(sk.stream_length(), 1000u);
}

TEST(S0Sketch, SchemaMismatch) {
  S0Sketch sk(3, 0.1, 0.1, 2);
  try {
    sk.insert(Record{RecordId{0}, {1, 2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::schema_mismatch);
  }
}

TEST(S0Sketch, RangePredicateUnsupported) {
  S0Sketch sk(2, 0.1, 0.1, 2);
  try {
    (void)sk.estimate_min(Query{{{0, Range{1, 4}}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::range_predicate_unsupported);
  }
}

// Values chosen so that no two of them share a column in any row: both
// estimators are exact.
TEST(S0Sketch, CollisionFreeStreamIsExact) {
  S0Sketch sk(2, 0.1, 0.1, 77);
  const auto v0 = separated_values(sk, 0, 4);
  const auto v1 = separated_values(sk, 1, 4);
  std::vector<Record> stream;
  std::uint64_t rid = 0;
  for (int i = 0; i < 7; ++i) stream.push_back({RecordId{rid++}, {v0[0], v1[0]}});
  for (int i = 0; i < 20; ++i) stream.push_back({RecordId{rid++}, {v0[i % 4], v1[(i + 1) % 4]}});
  for (const auto& r : stream) sk.insert(r);
  Query q{{{0, Equality{v0[0]}}, {1, Equality{v1[0]}}}};
  const auto exact = RecordStore(stream).exact_count(q);
  EXPECT_EQ(exact, 7u + 0u);  // the extra records never pair v0[0] with v1[0]
  EXPECT_EQ(sk.estimate_min(q).value, 7.0);
  EXPECT_EQ(sk.estimate_cap(q).value, 7.0);
}

TEST(S0Sketch, NoFalseNegativesAndDominance) {
  auto stream = uniform_stream(20000, 4, 40, 9);
  S0Sketch sk(4, 0.2, 0.05, 3);
  for (const auto& r : stream) sk.insert(r);
  RecordStore oracle(stream);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 300; ++i) {
    const auto& r = stream[rng() % stream.size()];
    std::vector<std::size_t> attrs{0, 1, 2, 3};
    std::shuffle(attrs.begin(), attrs.end(), rng);
    attrs.resize(1 + rng() % 4);
    const auto q = query_from(r, attrs);
    const auto f = static_cast<double>(oracle.exact_count(q));
    const auto lo = sk.estimate_min(q).value;
    const auto cap = sk.estimate_cap(q).value;
    ASSERT_GE(cap, f);
    ASSERT_GE(lo, f);
    ASSERT_LE(cap, lo);
  }
}

// Explicit dimensions, used to align with the sampled sketch.
TEST(S0Sketch, ExplicitDimensions) {
  S0Sketch sk(2, GridDimensions{8, 3}, 5);
  EXPECT_EQ(sk.width(), 8u);
  EXPECT_EQ(sk.depth(), 3u);
  EXPECT_THROW(S0Sketch(2, GridDimensions{0, 3}, 5), Error);
}
