#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace omnisketch {

__extension__ typedef unsigned __int128 u128;  // GCC/Clang extension

enum class Errc {
  empty_query,
  duplicate_attribute,
  out_of_domain,
  unknown_attribute,
  invalid_width,
  invalid_bit_width,
  invalid_epsilon_delta,
  epsilon_out_of_range,
  budget_too_small,
  invalid_sample_size,
  schema_mismatch,
  range_predicate_unsupported,
  domain_not_power_of_two,
  invalid_spec,
  parse_error,
  query_parse_error,
  snapshot_error,
  estimator_schema_mismatch,
};

[[nodiscard]] constexpr auto errc_name(Errc code) noexcept -> const char* {
  switch (code) {
    case Errc::empty_query: return "EmptyQuery";
    case Errc::duplicate_attribute: return "DuplicateAttribute";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::unknown_attribute: return "UnknownAttribute";
    case Errc::invalid_width: return "InvalidWidth";
    case Errc::invalid_bit_width: return "InvalidBitWidth";
    case Errc::invalid_epsilon_delta: return "InvalidEpsilonDelta";
    case Errc::epsilon_out_of_range: return "EpsilonOutOfRange";
    case Errc::budget_too_small: return "BudgetTooSmall";
    case Errc::invalid_sample_size: return "InvalidSampleSize";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::range_predicate_unsupported: return "RangePredicateUnsupported";
    case Errc::domain_not_power_of_two: return "DomainNotPowerOfTwo";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::parse_error: return "ParseError";
    case Errc::query_parse_error: return "QueryParseError";
    case Errc::snapshot_error: return "SnapshotError";
    case Errc::estimator_schema_mismatch: return "EstimatorSchemaMismatch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  [[nodiscard]] auto code() const noexcept -> Errc { return code_; }

 private:
  Errc code_;
};

struct RecordId {
  std::uint64_t value = 0;

  friend constexpr auto operator<=>(RecordId, RecordId) = default;
};

using AttributeValue = std::uint64_t;

/// Hash of a record id under the global rid hasher; lives in [0, 2^b - 1].
using Fingerprint = std::uint64_t;

struct Record {
  RecordId rid;
  std::vector<AttributeValue> values;
};

struct Equality {
  AttributeValue value = 0;

  friend constexpr auto operator==(const Equality&, const Equality&) -> bool = default;
};

/// Inclusive on both ends.
struct Range {
  AttributeValue lo = 0;
  AttributeValue hi = 0;

  friend constexpr auto operator==(const Range&, const Range&) -> bool = default;
};

/// A predicate on one attribute. Attribute indices are zero-based; the text
/// grammar's `a1` is attribute 0.
struct Predicate {
  std::size_t attribute = 0;
  std::variant<Equality, Range> kind;

  [[nodiscard]] auto is_range() const noexcept -> bool { return std::holds_alternative<Range>(kind); }

  [[nodiscard]] auto matches(AttributeValue v) const noexcept -> bool {
    if (const auto* eq = std::get_if<Equality>(&kind)) return v == eq->value;
    const auto& r = std::get<Range>(kind);
    return r.lo <= v && v <= r.hi;
  }

  friend auto operator==(const Predicate&, const Predicate&) -> bool = default;
};

/// Conjunction of predicates.
struct Query {
  std::vector<Predicate> predicates;

  [[nodiscard]] auto p() const noexcept -> std::size_t { return predicates.size(); }

  [[nodiscard]] auto matches(const Record& r) const noexcept -> bool {
    for (const auto& pred : predicates) {
      if (pred.attribute >= r.values.size() || !pred.matches(r.values[pred.attribute])) return false;
    }
    return true;
  }

  friend auto operator==(const Query&, const Query&) -> bool = default;
};

/// Canonical ordering so that structurally equal queries compare equal
/// regardless of predicate order.
inline auto canonicalize(Query q) -> Query {
  std::sort(q.predicates.begin(), q.predicates.end(),
            [](const Predicate& a, const Predicate& b) { return a.attribute < b.attribute; });
  return q;
}

inline auto operator<(const Query& a, const Query& b) -> bool {
  auto key = [](const Query& q) {
    std::vector<std::tuple<std::size_t, std::size_t, AttributeValue, AttributeValue>> out;
    out.reserve(q.predicates.size());
    for (const auto& pred : q.predicates) {
      if (const auto* eq = std::get_if<Equality>(&pred.kind)) {
        out.emplace_back(pred.attribute, 0, eq->value, eq->value);
      } else {
        const auto& r = std::get<Range>(pred.kind);
        out.emplace_back(pred.attribute, 1, r.lo, r.hi);
      }
    }
    return out;
  };
  return key(a) < key(b);
}

struct Estimate {
  double value = 0.0;
  std::uint64_t intersection_size = 0;
  std::uint64_t n_max = 0;
  bool below_sanity = true;
  double sanity_threshold = 0.0;
  double fallback_value = 0.0;
};

/// Per-attribute domain description. An attribute is range-enabled when it
/// declares `domain_bits`, in which case its values lie in [1, 2^domain_bits].
struct AttributeDomain {
  std::optional<unsigned> domain_bits;

  [[nodiscard]] auto range_enabled() const noexcept -> bool { return domain_bits.has_value(); }
  [[nodiscard]] auto max_value() const noexcept -> AttributeValue {
    return domain_bits ? (AttributeValue{1} << *domain_bits) : ~AttributeValue{0};
  }

  friend auto operator==(const AttributeDomain&, const AttributeDomain&) -> bool = default;
};

struct Schema {
  std::vector<AttributeDomain> attributes;

  Schema() = default;
  explicit Schema(std::vector<AttributeDomain> attrs) : attributes(std::move(attrs)) {}

  static auto point_only(std::size_t attribute_count) -> Schema {
    return Schema(std::vector<AttributeDomain>(attribute_count));
  }

  [[nodiscard]] auto attribute_count() const noexcept -> std::size_t { return attributes.size(); }

  /// Number of internal attribute grids: one per point attribute, one per
  /// dyadic level for range-enabled attributes.
  [[nodiscard]] auto grid_count() const noexcept -> std::size_t {
    std::size_t n = 0;
    for (const auto& a : attributes) n += a.domain_bits ? *a.domain_bits : 1;
    return n;
  }

  friend auto operator==(const Schema&, const Schema&) -> bool = default;
};

inline void validate_schema(const Schema& schema) {
  if (schema.attribute_count() == 0) throw Error(Errc::schema_mismatch, "schema has no attributes");
  for (const auto& a : schema.attributes) {
    if (a.domain_bits && (*a.domain_bits < 1 || *a.domain_bits > 32)) {
      throw Error(Errc::domain_not_power_of_two, "domain_bits must lie in [1, 32]");
    }
  }
}

inline void validate_query(const Query& query, const Schema& schema) {
  if (query.predicates.empty()) throw Error(Errc::empty_query, "query has no predicates");
  std::set<std::size_t> seen;
  for (const auto& pred : query.predicates) {
    if (pred.attribute >= schema.attribute_count()) {
      throw Error(Errc::unknown_attribute, "attribute index " + std::to_string(pred.attribute + 1) +
                                               " outside schema of " +
                                               std::to_string(schema.attribute_count()));
    }
    if (!seen.insert(pred.attribute).second) {
      throw Error(Errc::duplicate_attribute, "attribute a" + std::to_string(pred.attribute + 1) +
                                                 " appears more than once");
    }
    const auto& domain = schema.attributes[pred.attribute];
    if (const auto* r = std::get_if<Range>(&pred.kind)) {
      if (r->lo > r->hi) throw Error(Errc::out_of_domain, "range lower bound exceeds upper bound");
      if (domain.range_enabled() && (r->lo < 1 || r->hi > domain.max_value())) {
        throw Error(Errc::out_of_domain, "range outside attribute domain");
      }
    } else if (domain.range_enabled()) {
      const auto v = std::get<Equality>(pred.kind).value;
      if (v < 1 || v > domain.max_value()) throw Error(Errc::out_of_domain, "value outside attribute domain");
    }
  }
}

inline void validate_record(const Record& r, const Schema& schema) {
  if (r.values.size() != schema.attribute_count()) {
    throw Error(Errc::schema_mismatch, "record has " + std::to_string(r.values.size()) +
                                           " values, schema expects " +
                                           std::to_string(schema.attribute_count()));
  }
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const auto& domain = schema.attributes[i];
    if (domain.range_enabled() && (r.values[i] < 1 || r.values[i] > domain.max_value())) {
      throw Error(Errc::out_of_domain, "value of a" + std::to_string(i + 1) + " outside [1, 2^" +
                                           std::to_string(*domain.domain_bits) + "]");
    }
  }
}

}  // namespace omnisketch
