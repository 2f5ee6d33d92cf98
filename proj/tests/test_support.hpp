#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "omnisketch/types.hpp"

namespace testing_support {

// Independent uniform stream; values in [1, domain].
inline auto uniform_stream(std::size_t n, std::size_t attrs, std::uint64_t domain, std::uint64_t seed)
    -> std::vector<omnisketch::Record> {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> dist(1, domain);
  std::vector<omnisketch::Record> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].rid = omnisketch::RecordId{i};
    for (std::size_t a = 0; a < attrs; ++a) out[i].values.push_back(dist(rng));
  }
  return out;
}

// Equality query on the given attributes using the values of `r`.
inline auto query_from(const omnisketch::Record& r, const std::vector<std::size_t>& attrs) -> omnisketch::Query {
  omnisketch::Query q;
  for (auto a : attrs) q.predicates.push_back({a, omnisketch::Equality{r.values[a]}});
  return q;
}

// Second, independently written exact count.
inline auto brute_count(const std::vector<omnisketch::Record>& stream, const omnisketch::Query& q) -> std::uint64_t {
  std::uint64_t n = 0;
  for (const auto& r : stream) {
    bool ok = true;
    for (const auto& pred : q.predicates) {
      const auto v = r.values[pred.attribute];
      if (const auto* eq = std::get_if<omnisketch::Equality>(&pred.kind)) {
        ok = ok && v == eq->value;
      } else {
        const auto& rg = std::get<omnisketch::Range>(pred.kind);
        ok = ok && rg.lo <= v && v <= rg.hi;
      }
    }
    n += ok ? 1 : 0;
  }
  return n;
}

}  // namespace testing_support
