#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "omnisketch/workload.hpp"

using namespace omnisketch;

namespace {

auto spec(std::uint64_t n, std::size_t attrs, Distribution d, std::uint64_t seed) -> StreamSpec {
  StreamSpec s;
  s.n = n;
  s.attribute_count = attrs;
  s.distributions = {d};
  s.seed = seed;
  return s;
}

}  // namespace

TEST(GenerateStream, UniformMarginals) {
  const auto stream = generate_stream(spec(100000, 1, Distribution::uniform(100), 1));
  std::vector<double> counts(101, 0.0);
  for (const auto& r : stream) {
    ASSERT_GE(r.values[0], 1u);
    ASSERT_LE(r.values[0], 100u);
    counts[r.values[0]] += 1;
  }
  const double mean = 1000.0;
  const double sigma = std::sqrt(100000 * 0.01 * 0.99);
  for (int v = 1; v <= 100; ++v) EXPECT_NEAR(counts[v], mean, 5 * sigma) << v;
}

TEST(GenerateStream, ZipfRankRatio) {
  const auto stream = generate_stream(spec(100000, 1, Distribution::zipf(1.0, 1000), 2));
  double c1 = 0, c2 = 0;
  for (const auto& r : stream) {
    c1 += r.values[0] == 1 ? 1 : 0;
    c2 += r.values[0] == 2 ? 1 : 0;
  }
  EXPECT_NEAR(c1 / c2, 2.0, 0.2);
}

TEST(GenerateStream, EmptyAndDeterministic) {
  EXPECT_TRUE(generate_stream(spec(0, 3, Distribution::uniform(10), 1)).empty());
  const auto a = generate_stream(spec(1000, 3, Distribution::zipf(1.3, 50), 9));
  const auto b = generate_stream(spec(1000, 3, Distribution::zipf(1.3, 50), 9));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].values, b[i].values);
    ASSERT_EQ(a[i].rid, RecordId{i});
  }
}

TEST(GenerateStream, InvalidSpecs) {
  auto code = [](const StreamSpec& s) {
    try {
      (void)generate_stream(s);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::parse_error;
  };
  EXPECT_EQ(code(spec(10, 1, Distribution::zipf(0.0, 10), 1)), Errc::invalid_spec);
  EXPECT_EQ(code(spec(10, 1, Distribution::uniform(1), 1)), Errc::invalid_spec);
  auto s = spec(10, 3, Distribution::uniform(4), 1);
  s.distributions.push_back(Distribution::uniform(4));
  EXPECT_EQ(code(s), Errc::invalid_spec);
}

TEST(StreamSpecText, Parses) {
  const auto s = parse_stream_spec("n=100000,attrs=5,dist=zipf:1.1,domain=1024,seed=7");
  EXPECT_EQ(s.n, 100000u);
  EXPECT_EQ(s.attribute_count, 5u);
  EXPECT_EQ(s.seed, 7u);
  ASSERT_EQ(s.distributions.size(), 1u);
  EXPECT_EQ(s.distributions[0].kind, Distribution::Kind::zipf);
  EXPECT_DOUBLE_EQ(s.distributions[0].alpha, 1.1);
  EXPECT_EQ(s.distributions[0].domain, 1024u);
  const auto m = parse_stream_spec("n=10,attrs=2,dist=uniform|zipf:1.5,domain=16");
  EXPECT_EQ(m.distributions.size(), 2u);
  EXPECT_THROW((void)parse_stream_spec("n=10,colour=red"), Error);
  EXPECT_THROW((void)parse_stream_spec("n=ten"), Error);
  EXPECT_THROW((void)parse_stream_spec("dist=zipf:x"), Error);
}

TEST(GenerateQueries, SingleRecordDedupes) {
  std::vector<Record> one{{RecordId{0}, {3, 4}}};
  const auto w = generate_queries(one, {});
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.queries[0].p(), 2u);
  EXPECT_EQ(w.provenance[0].rid, RecordId{0});
}

TEST(GenerateQueries, EveryQueryMatchesAndBound) {
  const auto stream = generate_stream(spec(20000, 6, Distribution::zipf(1.1, 200), 3));
  QueryGenOptions opts;
  opts.seed = 4;
  const auto w = generate_queries(stream, opts);
  RecordStore oracle(stream);
  std::set<Query> unique(w.queries.begin(), w.queries.end());
  EXPECT_EQ(unique.size(), w.size());
  const std::size_t sampled = 10;  // 0.0005 * 20000
  EXPECT_LE(w.size(), sampled * 5 * 10);
  EXPECT_GT(w.size(), 0u);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& q = w.queries[i];
    ASSERT_GE(oracle.exact_count(q), 1u);
    ASSERT_GE(q.p(), 2u);
    ASSERT_LE(q.p(), 6u);
    ASSERT_EQ(q.p(), w.provenance[i].attributes.size());
    ASSERT_TRUE(q.matches(stream[w.provenance[i].rid.value]));
  }
}

TEST(Benchmark, ExactRegimeZeroErrorForIntersection) {
  // constructed stream: two attributes, values below 4, 64-wide grids
  std::vector<Record> stream;
  for (std::uint64_t i = 0; i < 400; ++i) stream.push_back({RecordId{i}, {1 + i % 3, 1 + (i / 3) % 3}});
  auto est = make_s0_estimators(stream, 2, 0.01, 0.01, 7);
  QueryWorkload w;
  for (AttributeValue a = 1; a <= 3; ++a)
    for (AttributeValue b = 1; b <= 3; ++b) w.queries.push_back(Query{{{0, Equality{a}}, {1, Equality{b}}}});
  w.provenance.resize(w.queries.size());
  RecordStore oracle(stream);
  const auto report = run_benchmark(stream, w, est, &oracle);
  ASSERT_EQ(report.estimators.size(), 2u);
  ASSERT_TRUE(report.estimators[1].mean_abs_error_normalized.has_value());
  // w = 273, d = 5: for this seed no pair of values shares a column in every row
  EXPECT_EQ(*report.estimators[1].mean_abs_error_normalized, 0.0);
  EXPECT_GE(*report.estimators[0].mean_abs_error_normalized, 0.0);
  EXPECT_EQ(report.estimators[1].by_p.at(2).queries, 9u);
}

TEST(Benchmark, EmptyWorkload) {
  const auto stream = generate_stream(spec(100, 2, Distribution::uniform(5), 1));
  auto est = make_s0_estimators(stream, 2, 0.1, 0.1, 1);
  RecordStore oracle(stream);
  const auto report = run_benchmark(stream, QueryWorkload{}, est, &oracle);
  EXPECT_EQ(report.queries, 0u);
  for (const auto& e : report.estimators) {
    EXPECT_FALSE(e.mean_abs_error_normalized.has_value());
    EXPECT_TRUE(e.by_p.empty());
  }
}

TEST(Benchmark, SchemaMismatch) {
  const auto stream = generate_stream(spec(100, 2, Distribution::uniform(5), 1));
  const auto wider = generate_stream(spec(100, 3, Distribution::uniform(5), 1));
  auto est = make_s0_estimators(wider, 3, 0.1, 0.1, 1);
  try {
    (void)run_benchmark(stream, QueryWorkload{}, est, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::estimator_schema_mismatch);
  }
}

TEST(Benchmark, CsvReproducibleAndNoOracleColumns) {
  auto csv = [](bool with_oracle, bool timing) {
    const auto stream = generate_stream(spec(5000, 4, Distribution::zipf(1.1, 100), 5));
    QueryGenOptions opts;
    opts.sample_rate = 0.002;
    opts.seed = 1;
    const auto w = generate_queries(stream, opts);
    auto est = make_s0_estimators(stream, 4, 0.1, 0.1, 2);
    est.push_back(make_s1_estimator(stream, configure(0.1, 0.1, 1024 * 1024 * 8, 4, 2), Schema::point_only(4)));
    RecordStore oracle(stream);
    const auto report = run_benchmark(stream, w, est, with_oracle ? &oracle : nullptr);
    std::ostringstream os;
    write_report_csv(os, report, timing);
    return os.str();
  };
  const auto a = csv(true, false);
  EXPECT_EQ(a, csv(true, false));
  EXPECT_NE(a.find("mean_abs_error_normalized"), std::string::npos);
  EXPECT_NE(a.find(",s1,"), std::string::npos);
  const auto b = csv(false, true);
  EXPECT_EQ(b.find("mean_abs_error_normalized"), std::string::npos);
  EXPECT_NE(b.find("mean_latency_us"), std::string::npos);
}

TEST(Benchmark, CountsReconcile) {
  const auto stream = generate_stream(spec(4000, 3, Distribution::zipf(1.2, 50), 8));
  QueryGenOptions opts;
  opts.sample_rate = 0.005;
  const auto w = generate_queries(stream, opts);
  auto est = make_s0_estimators(stream, 3, 0.1, 0.1, 2);
  RecordStore oracle(stream);
  const auto report = run_benchmark(stream, w, est, &oracle);
  for (const auto& e : report.estimators) {
    std::size_t total = 0;
    for (const auto& [p, b] : e.by_p) {
      total += b.queries;
      EXPECT_GE(b.sum_abs_error, 0.0);
    }
    EXPECT_EQ(total, w.size());
  }
  std::ostringstream rows;
  write_query_rows_csv(rows, report, false);
  const auto text = rows.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), w.size() + 1);
}
