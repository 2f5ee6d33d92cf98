#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omnisketch/format.hpp"
#include "omnisketch/omnisketch.hpp"
#include "omnisketch/oracle.hpp"
#include "omnisketch/s0_sketch.hpp"
#include "omnisketch/types.hpp"

namespace omnisketch {

struct Distribution {
  enum class Kind { uniform, zipf };
  Kind kind = Kind::uniform;
  double alpha = 1.0;           // zipf exponent
  std::uint64_t domain = 1024;  // values drawn from [1, domain]

  static auto uniform(std::uint64_t domain) -> Distribution { return {Kind::uniform, 0.0, domain}; }
  static auto zipf(double alpha, std::uint64_t domain) -> Distribution { return {Kind::zipf, alpha, domain}; }
};

struct StreamSpec {
  std::uint64_t n = 0;
  std::size_t attribute_count = 1;
  std::vector<Distribution> distributions;  // one per attribute, or one shared by all
  std::uint64_t seed = 0;

  [[nodiscard]] auto distribution(std::size_t attribute) const -> const Distribution& {
    return distributions.size() == 1 ? distributions.front() : distributions.at(attribute);
  }
};

inline void validate_stream_spec(const StreamSpec& spec) {
  if (spec.attribute_count == 0) throw Error(Errc::invalid_spec, "attribute_count must be >= 1");
  if (spec.distributions.size() != 1 && spec.distributions.size() != spec.attribute_count) {
    throw Error(Errc::invalid_spec, "need one distribution or one per attribute");
  }
  for (const auto& d : spec.distributions) {
    if (d.domain < 2) throw Error(Errc::invalid_spec, "distribution domain must be >= 2");
    if (d.kind == Distribution::Kind::zipf && !(d.alpha > 0.0)) throw Error(Errc::invalid_spec, "zipf alpha must be > 0");
  }
}

/// Zipf over ranks 1..domain by inverse CDF: Pr[k] proportional to k^-alpha.
class ZipfSampler {
 public:
  ZipfSampler(double alpha, std::uint64_t domain) : cdf_(domain) {
    double total = 0.0;
    for (std::uint64_t k = 0; k < domain; ++k) {
      total += std::pow(static_cast<double>(k + 1), -alpha);
      cdf_[k] = total;
    }
    for (auto& c : cdf_) c /= total;
    cdf_.back() = 1.0;
  }

  template <class Rng>
  auto operator()(Rng& rng) const -> std::uint64_t {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return static_cast<std::uint64_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) + 1;
  }

 private:
  std::vector<double> cdf_;
};

/// Deterministic per seed. Record ids are arrival numbers 0 .. n-1.
inline auto generate_stream(const StreamSpec& spec) -> std::vector<Record> {
  validate_stream_spec(spec);
  std::vector<std::function<std::uint64_t(std::mt19937_64&)>> samplers;
  for (std::size_t a = 0; a < spec.attribute_count; ++a) {
    const auto& d = spec.distribution(a);
    if (d.kind == Distribution::Kind::zipf) {
      auto z = std::make_shared<ZipfSampler>(d.alpha, d.domain);
      samplers.emplace_back([z](std::mt19937_64& rng) { return (*z)(rng); });
    } else {
      samplers.emplace_back([dist = std::uniform_int_distribution<std::uint64_t>(1, d.domain)](
                                std::mt19937_64& rng) mutable { return dist(rng); });
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<Record> out;
  out.reserve(spec.n);
  for (std::uint64_t i = 0; i < spec.n; ++i) {
    Record r;
    r.rid = RecordId{i};
    r.values.reserve(spec.attribute_count);
    for (auto& s : samplers) r.values.push_back(s(rng));
    out.push_back(std::move(r));
  }
  return out;
}

/// "n=100000,attrs=5,dist=zipf:1.1,domain=1024,seed=7". `dist` may list one
/// distribution per attribute separated by '|', e.g. "zipf:1.3|uniform".
inline auto parse_stream_spec(std::string_view text) -> StreamSpec {
  StreamSpec spec;
  spec.n = 0;
  std::uint64_t domain = 1024;
  std::vector<std::string> dists{"uniform"};
  for (auto field : detail::split(text, ',')) {
    field = detail::trim(field);
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::invalid_spec, "expected key=value in '" + std::string(field) + "'");
    const auto key = detail::trim(field.substr(0, eq));
    const auto value = detail::trim(field.substr(eq + 1));
    auto number = [&]() {
      auto v = detail::parse_u64(value);
      if (!v) throw Error(Errc::invalid_spec, "malformed number for '" + std::string(key) + "'");
      return *v;
    };
    if (key == "n") {
      spec.n = number();
    } else if (key == "attrs") {
      spec.attribute_count = number();
    } else if (key == "domain") {
      domain = number();
    } else if (key == "seed") {
      spec.seed = number();
    } else if (key == "dist") {
      dists.clear();
      for (auto d : detail::split(value, '|')) dists.emplace_back(detail::trim(d));
    } else {
      throw Error(Errc::invalid_spec, "unknown stream spec key '" + std::string(key) + "'");
    }
  }
  for (const auto& d : dists) {
    if (d == "uniform") {
      spec.distributions.push_back(Distribution::uniform(domain));
    } else if (d.rfind("zipf:", 0) == 0) {
      double alpha = 0.0;
      try {
        alpha = std::stod(d.substr(5));
      } catch (const std::exception&) {
        throw Error(Errc::invalid_spec, "malformed zipf exponent in '" + d + "'");
      }
      spec.distributions.push_back(Distribution::zipf(alpha, domain));
    } else {
      throw Error(Errc::invalid_spec, "unknown distribution '" + d + "'");
    }
  }
  validate_stream_spec(spec);
  return spec;
}

struct QueryProvenance {
  RecordId rid;
  std::vector<std::size_t> attributes;
};

struct QueryWorkload {
  std::vector<Query> queries;
  std::vector<QueryProvenance> provenance;  // parallel to queries

  [[nodiscard]] auto size() const noexcept -> std::size_t { return queries.size(); }
};

struct QueryGenOptions {
  double sample_rate = 0.0005;
  std::size_t p_min = 2;
  std::size_t p_max = 0;  // 0 means |A|
  std::size_t per_record_per_p = 10;
  std::uint64_t seed = 0;
};

/// Samples max(1, round(rate * N)) records; for each and for every p in
/// [p_min, p_max] draws `per_record_per_p` random p-attribute subsets and uses
/// the record's values as equality predicates. Duplicates are dropped, first
/// occurrence wins.
inline auto generate_queries(std::span<const Record> stream, const QueryGenOptions& opts) -> QueryWorkload {
  QueryWorkload out;
  if (stream.empty()) return out;
  const std::size_t attrs = stream.front().values.size();
  const std::size_t p_max = opts.p_max == 0 ? attrs : std::min(opts.p_max, attrs);
  const std::size_t p_min = std::min(std::max<std::size_t>(opts.p_min, 1), p_max);

  std::mt19937_64 rng(opts.seed);
  const auto wanted = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(opts.sample_rate * static_cast<double>(stream.size()))));
  std::vector<std::size_t> all(stream.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  std::sample(all.begin(), all.end(), std::back_inserter(picked), std::min(wanted, stream.size()), rng);

  std::set<Query> seen;
  std::vector<std::size_t> order(attrs);
  for (auto idx : picked) {
    const auto& rec = stream[idx];
    for (std::size_t p = p_min; p <= p_max; ++p) {
      for (std::size_t rep = 0; rep < opts.per_record_per_p; ++rep) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p));
        std::sort(chosen.begin(), chosen.end());
        Query q;
        for (auto a : chosen) q.predicates.push_back({a, Equality{rec.values[a]}});
        if (seen.insert(q).second) {
          out.queries.push_back(std::move(q));
          out.provenance.push_back({rec.rid, std::move(chosen)});
        }
      }
    }
  }
  return out;
}

/// A named, type-erased estimator over an already-ingested stream.
struct EstimatorHandle {
  std::string name;
  std::size_t attribute_count = 0;
  std::function<Estimate(const Query&)> estimate;
  std::size_t memory_bytes = 0;
  double ingest_seconds = 0.0;
  std::uint64_t ingested = 0;
};

/// Builds one rid-list sketch and exposes its two estimators ("s0min", "s0cap").
inline auto make_s0_estimators(std::span<const Record> stream, std::size_t attribute_count, double epsilon,
                               double delta, std::uint64_t seed) -> std::vector<EstimatorHandle> {
  auto sketch = std::make_shared<S0Sketch>(attribute_count, epsilon, delta, seed);
  const auto start = std::chrono::steady_clock::now();
  for (const auto& r : stream) sketch->insert(r);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EstimatorHandle min{"s0min", attribute_count, [sketch](const Query& q) { return sketch->estimate_min(q); },
                      sketch->memory_bytes(), secs, stream.size()};
  EstimatorHandle cap{"s0cap", attribute_count, [sketch](const Query& q) { return sketch->estimate_cap(q); },
                      sketch->memory_bytes(), secs, stream.size()};
  return {std::move(min), std::move(cap)};
}

inline auto make_s1_estimator(std::span<const Record> stream, const SketchParams& params, const Schema& schema,
                              std::string name = "s1") -> EstimatorHandle {
  auto sketch = std::make_shared<OmniSketch>(params, schema);
  const auto start = std::chrono::steady_clock::now();
  for (const auto& r : stream) sketch->insert(r);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(name), schema.attribute_count(), [sketch](const Query& q) { return sketch->estimate(q); },
          sketch->memory_bytes(), secs, stream.size()};
}

struct ErrorBucket {
  std::size_t queries = 0;
  double sum_abs_error = 0.0;
};

struct EstimatorReport {
  std::string name;
  std::size_t queries = 0;
  std::optional<double> mean_abs_error_normalized;  // sum |f^ - f| / (N |Q|)
  std::map<std::size_t, ErrorBucket> by_p;
  double mean_latency_us = 0.0;
  double p50_latency_us = 0.0;
  double p99_latency_us = 0.0;
  double ingest_records_per_sec = 0.0;
  std::size_t memory_bytes = 0;
};

struct QueryRow {
  std::size_t p = 0;
  std::optional<std::uint64_t> exact;
  std::vector<double> estimates;     // one per estimator
  std::vector<double> latencies_us;  // one per estimator
};

struct BenchmarkReport {
  std::uint64_t stream_length = 0;
  std::size_t queries = 0;
  bool has_oracle = false;
  std::vector<EstimatorReport> estimators;
  std::vector<QueryRow> rows;
};

/// Runs every workload query on every estimator and, when an oracle is
/// given, scores them by mean absolute error normalised by the stream size.
inline auto run_benchmark(std::span<const Record> stream, const QueryWorkload& workload,
                          std::span<const EstimatorHandle> estimators, const RecordStore* oracle)
    -> BenchmarkReport {
  const std::size_t attrs = stream.empty() ? 0 : stream.front().values.size();
  for (const auto& e : estimators) {
    if (!stream.empty() && e.attribute_count != attrs) {
      throw Error(Errc::estimator_schema_mismatch, "estimator '" + e.name + "' expects " +
                                                       std::to_string(e.attribute_count) +
                                                       " attributes, stream has " + std::to_string(attrs));
    }
  }

  BenchmarkReport report;
  report.stream_length = stream.size();
  report.queries = workload.size();
  report.has_oracle = oracle != nullptr;
  report.rows.resize(workload.size());

  for (std::size_t qi = 0; qi < workload.size(); ++qi) {
    const auto& q = workload.queries[qi];
    auto& row = report.rows[qi];
    row.p = q.p();
    if (oracle) row.exact = oracle->exact_count(q);
    for (const auto& e : estimators) {
      const auto start = std::chrono::steady_clock::now();
      const auto est = e.estimate(q);
      const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
      row.estimates.push_back(est.value);
      row.latencies_us.push_back(us);
    }
  }

  const double n = static_cast<double>(std::max<std::uint64_t>(report.stream_length, 1));
  for (std::size_t ei = 0; ei < estimators.size(); ++ei) {
    EstimatorReport er;
    er.name = estimators[ei].name;
    er.queries = workload.size();
    er.memory_bytes = estimators[ei].memory_bytes;
    if (estimators[ei].ingest_seconds > 0.0) {
      er.ingest_records_per_sec = static_cast<double>(estimators[ei].ingested) / estimators[ei].ingest_seconds;
    }
    std::vector<double> lat;
    lat.reserve(report.rows.size());
    double total_err = 0.0;
    for (const auto& row : report.rows) {
      lat.push_back(row.latencies_us[ei]);
      if (row.exact) {
        const double err = std::abs(row.estimates[ei] - static_cast<double>(*row.exact));
        total_err += err;
        auto& bucket = er.by_p[row.p];
        ++bucket.queries;
        bucket.sum_abs_error += err;
      }
    }
    if (oracle && !report.rows.empty()) er.mean_abs_error_normalized = total_err / (n * static_cast<double>(report.rows.size()));
    if (!lat.empty()) {
      er.mean_latency_us = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
      std::sort(lat.begin(), lat.end());
      er.p50_latency_us = lat[lat.size() / 2];
      er.p99_latency_us = lat[std::min(lat.size() - 1, (lat.size() * 99) / 100)];
    }
    report.estimators.push_back(std::move(er));
  }
  return report;
}

inline constexpr int kReportSchemaVersion = 1;

namespace detail {
inline auto fmt_double(double v) -> std::string {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}
}  // namespace detail

/// Summary CSV, one row per (estimator, p) plus an "all" row per estimator.
/// Columns, in order:
///   version,estimator,p,queries,memory_bytes
///   [,mean_abs_error_normalized]                                  when scored against an oracle
///   [,mean_latency_us,p50_latency_us,p99_latency_us,ingest_records_per_sec]   when `timing`
/// Without timing columns the output is byte-identical across runs with the same seeds.
inline void write_report_csv(std::ostream& os, const BenchmarkReport& report, bool timing) {
  os << "version,estimator,p,queries,memory_bytes";
  if (report.has_oracle) os << ",mean_abs_error_normalized";
  if (timing) os << ",mean_latency_us,p50_latency_us,p99_latency_us,ingest_records_per_sec";
  os << '\n';
  const double n = static_cast<double>(std::max<std::uint64_t>(report.stream_length, 1));
  for (const auto& er : report.estimators) {
    os << kReportSchemaVersion << ',' << er.name << ",all," << er.queries << ',' << er.memory_bytes;
    if (report.has_oracle) os << ',' << (er.mean_abs_error_normalized ? detail::fmt_double(*er.mean_abs_error_normalized) : "");
    if (timing) {
      os << ',' << detail::fmt_double(er.mean_latency_us) << ',' << detail::fmt_double(er.p50_latency_us) << ','
         << detail::fmt_double(er.p99_latency_us) << ',' << detail::fmt_double(er.ingest_records_per_sec);
    }
    os << '\n';
    if (!report.has_oracle) continue;
    for (const auto& [p, bucket] : er.by_p) {
      os << kReportSchemaVersion << ',' << er.name << ',' << p << ',' << bucket.queries << ',' << er.memory_bytes
         << ',' << detail::fmt_double(bucket.sum_abs_error / (n * static_cast<double>(bucket.queries)));
      if (timing) os << ",,,,";
      os << '\n';
    }
  }
}

/// Per-query CSV: query_id,p[,exact],<estimator>...[,<estimator>_latency_us...]
inline void write_query_rows_csv(std::ostream& os, const BenchmarkReport& report, bool timing) {
  os << "query_id,p";
  if (report.has_oracle) os << ",exact";
  for (const auto& er : report.estimators) os << ',' << er.name;
  if (timing) {
    for (const auto& er : report.estimators) os << ',' << er.name << "_latency_us";
  }
  os << '\n';
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    os << i << ',' << row.p;
    if (report.has_oracle) os << ',' << row.exact.value_or(0);
    for (double v : row.estimates) os << ',' << detail::fmt_double(v);
    if (timing) {
      for (double v : row.latencies_us) os << ',' << detail::fmt_double(v);
    }
    os << '\n';
  }
}

}  // namespace omnisketch
