#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "omnisketch/types.hpp"

namespace omnisketch {

namespace detail {

inline auto trim(std::string_view s) -> std::string_view {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline auto parse_u64(std::string_view s) -> std::optional<std::uint64_t> {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline auto iequals(std::string_view a, std::string_view b) -> bool {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

inline auto split(std::string_view s, char sep) -> std::vector<std::string_view> {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// "10MB" -> bits. Suffixes B, KB, MB, GB use powers of 1024; none means bytes.
inline auto parse_memory_bits(std::string_view text) -> std::uint64_t {
  auto s = detail::trim(text);
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  const auto number = detail::parse_u64(s.substr(0, digits));
  const auto suffix = detail::trim(s.substr(digits));
  std::uint64_t scale = 1;
  if (suffix.empty() || detail::iequals(suffix, "B")) {
    scale = 1;
  } else if (detail::iequals(suffix, "KB")) {
    scale = 1024;
  } else if (detail::iequals(suffix, "MB")) {
    scale = 1024 * 1024;
  } else if (detail::iequals(suffix, "GB")) {
    scale = 1024ULL * 1024 * 1024;
  } else {
    throw Error(Errc::parse_error, "unknown memory suffix in '" + std::string(text) + "'");
  }
  if (!number) throw Error(Errc::parse_error, "malformed memory size '" + std::string(text) + "'");
  return *number * scale * 8;
}

enum class AttributeKind : std::uint8_t { numeric = 0, categorical = 1 };

struct AttributeConfig {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  std::optional<unsigned> domain_bits;  // range-enabled numeric attribute

  friend auto operator==(const AttributeConfig&, const AttributeConfig&) -> bool = default;
};

/// Attribute names, kinds and the value dictionaries of categorical
/// attributes. Dictionary codes start at 1; code 0 stands for a value never
/// seen at ingestion.
class SchemaConfig {
 public:
  SchemaConfig() = default;
  explicit SchemaConfig(std::vector<AttributeConfig> attrs) : attributes_(std::move(attrs)) { init(); }

  /// k numeric point attributes named a1..ak.
  static auto numeric(std::size_t k) -> SchemaConfig {
    std::vector<AttributeConfig> attrs;
    for (std::size_t i = 0; i < k; ++i) attrs.push_back({"a" + std::to_string(i + 1), AttributeKind::numeric, {}});
    return SchemaConfig(std::move(attrs));
  }

  /// {"seed": 7, "attributes": [{"name": "src", "kind": "categorical"},
  ///                            {"name": "len", "kind": "numeric", "domain_bits": 16}]}
  static auto from_json(const nlohmann::json& j) -> SchemaConfig {
    SchemaConfig cfg;
    try {
      for (const auto& a : j.at("attributes")) {
        AttributeConfig ac;
        ac.name = a.at("name").get<std::string>();
        const auto kind = a.value("kind", std::string("numeric"));
        if (kind == "categorical") {
          ac.kind = AttributeKind::categorical;
        } else if (kind == "numeric") {
          ac.kind = AttributeKind::numeric;
        } else {
          throw Error(Errc::parse_error, "unknown attribute kind '" + kind + "'");
        }
        if (a.contains("domain_bits")) {
          if (ac.kind == AttributeKind::categorical) {
            throw Error(Errc::parse_error, "categorical attribute '" + ac.name + "' cannot be range-enabled");
          }
          const auto bits = a.at("domain_bits").get<int>();
          if (bits < 1 || bits > 32) throw Error(Errc::domain_not_power_of_two, "domain_bits must lie in [1, 32]");
          ac.domain_bits = static_cast<unsigned>(bits);
        }
        cfg.attributes_.push_back(std::move(ac));
      }
      if (j.contains("seed")) cfg.seed_ = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, std::string("schema: ") + e.what());
    }
    if (cfg.attributes_.empty()) throw Error(Errc::parse_error, "schema declares no attributes");
    cfg.init();
    return cfg;
  }

  [[nodiscard]] auto schema() const -> Schema {
    Schema s;
    for (const auto& a : attributes_) s.attributes.push_back({a.domain_bits});
    return s;
  }

  [[nodiscard]] auto attributes() const noexcept -> const std::vector<AttributeConfig>& { return attributes_; }
  [[nodiscard]] auto attribute_count() const noexcept -> std::size_t { return attributes_.size(); }
  [[nodiscard]] auto seed() const noexcept -> std::optional<std::uint64_t> { return seed_; }

  [[nodiscard]] auto index_of(std::string_view name) const -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
      if (attributes_[i].name == name) return i;
    }
    return std::nullopt;
  }

  /// Encodes a raw token. Unseen categorical values map to code 0.
  [[nodiscard]] auto encode(std::size_t attribute, std::string_view token) const -> std::optional<AttributeValue> {
    if (attributes_.at(attribute).kind == AttributeKind::numeric) return detail::parse_u64(token);
    const auto& dict = lookup_[attribute];
    auto it = dict.find(std::string(detail::trim(token)));
    return it == dict.end() ? AttributeValue{0} : it->second;
  }

  /// Like encode, but unseen categorical values get the next free code.
  auto encode_or_insert(std::size_t attribute, std::string_view token) -> std::optional<AttributeValue> {
    if (attributes_.at(attribute).kind == AttributeKind::numeric) return detail::parse_u64(token);
    auto key = std::string(detail::trim(token));
    auto& dict = lookup_[attribute];
    if (auto it = dict.find(key); it != dict.end()) return it->second;
    values_[attribute].push_back(key);
    const AttributeValue code = values_[attribute].size();
    dict.emplace(std::move(key), code);
    return code;
  }

  /// Inverse of encode for formatting.
  [[nodiscard]] auto decode(std::size_t attribute, AttributeValue v) const -> std::string {
    const auto& a = attributes_.at(attribute);
    if (a.kind == AttributeKind::numeric) return std::to_string(v);
    const auto& vals = values_.at(attribute);
    if (v == 0 || v > vals.size()) return "<unseen:" + std::to_string(v) + ">";
    return vals[v - 1];
  }

  /// Dictionary of a categorical attribute, in code order (code = index + 1).
  [[nodiscard]] auto dictionary(std::size_t attribute) const -> const std::vector<std::string>& {
    return values_.at(attribute);
  }

  void restore_dictionary(std::size_t attribute, std::vector<std::string> values) {
    auto& dict = lookup_.at(attribute);
    dict.clear();
    for (std::size_t i = 0; i < values.size(); ++i) dict.emplace(values[i], i + 1);
    values_.at(attribute) = std::move(values);
  }

  friend auto operator==(const SchemaConfig& a, const SchemaConfig& b) -> bool {
    return a.attributes_ == b.attributes_ && a.values_ == b.values_;
  }

 private:
  void init() {
    lookup_.assign(attributes_.size(), {});
    values_.assign(attributes_.size(), {});
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
      for (std::size_t k = 0; k < i; ++k) {
        if (attributes_[k].name == attributes_[i].name) {
          throw Error(Errc::parse_error, "duplicate attribute name '" + attributes_[i].name + "'");
        }
      }
    }
  }

  std::vector<AttributeConfig> attributes_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::unordered_map<std::string, AttributeValue>> lookup_;
  std::vector<std::vector<std::string>> values_;
};

// Query grammar:  pred ( AND pred )*
//                 pred := name '=' value | name IN '[' value ',' value ']'
// Keywords are case-insensitive.

namespace detail {

class QueryLexer {
 public:
  explicit QueryLexer(std::string_view text) : text_(text) {}

  auto next() -> std::string_view {
    skip_ws();
    if (pos_ >= text_.size()) return {};
    const char c = text_[pos_];
    if (c == '=' || c == '[' || c == ']' || c == ',') return text_.substr(pos_++, 1);
    const auto start = pos_;
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '=' || d == '[' || d == ']' || d == ',') break;
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  auto expect(std::string_view want) -> void {
    const auto tok = next();
    if (tok != want) {
      throw Error(Errc::query_parse_error, "expected '" + std::string(want) + "' but found '" + std::string(tok) + "'");
    }
  }

  [[nodiscard]] auto done() -> bool {
    skip_ws();
    return pos_ >= text_.size();
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline auto parse_query(std::string_view text, const SchemaConfig& schema) -> Query {
  detail::QueryLexer lex(text);
  Query q;
  auto value_of = [&](std::size_t attr, std::string_view tok) {
    if (tok.empty()) throw Error(Errc::query_parse_error, "missing value");
    auto v = schema.encode(attr, tok);
    if (!v) throw Error(Errc::query_parse_error, "malformed value '" + std::string(tok) + "'");
    return *v;
  };

  if (lex.done()) throw Error(Errc::query_parse_error, "empty query");
  while (true) {
    const auto name = lex.next();
    if (name.empty()) throw Error(Errc::query_parse_error, "expected attribute name");
    const auto attr = schema.index_of(name);
    if (!attr) throw Error(Errc::unknown_attribute, "unknown attribute '" + std::string(name) + "'");
    const auto op = lex.next();
    if (op == "=") {
      q.predicates.push_back({*attr, Equality{value_of(*attr, lex.next())}});
    } else if (detail::iequals(op, "IN")) {
      if (schema.attributes()[*attr].kind == AttributeKind::categorical) {
        throw Error(Errc::query_parse_error, "range predicate on categorical attribute '" + std::string(name) + "'");
      }
      lex.expect("[");
      const auto lo = value_of(*attr, lex.next());
      lex.expect(",");
      const auto hi = value_of(*attr, lex.next());
      lex.expect("]");
      q.predicates.push_back({*attr, Range{lo, hi}});
    } else {
      throw Error(Errc::query_parse_error, "expected '=' or IN after '" + std::string(name) + "'");
    }
    if (lex.done()) break;
    const auto conj = lex.next();
    if (!detail::iequals(conj, "AND")) {
      throw Error(Errc::query_parse_error, "expected AND but found '" + std::string(conj) + "'");
    }
  }
  return q;
}

inline auto format_query(const Query& q, const SchemaConfig& schema) -> std::string {
  std::string out;
  for (std::size_t i = 0; i < q.predicates.size(); ++i) {
    const auto& pred = q.predicates[i];
    if (i > 0) out += " AND ";
    out += schema.attributes().at(pred.attribute).name;
    if (const auto* eq = std::get_if<Equality>(&pred.kind)) {
      out += "=" + schema.decode(pred.attribute, eq->value);
    } else {
      const auto& r = std::get<Range>(pred.kind);
      out += " IN [" + schema.decode(pred.attribute, r.lo) + "," + schema.decode(pred.attribute, r.hi) + "]";
    }
  }
  return out;
}

/// Reads `rid,a1,...,ak` CSV (the rid column is optional; arrival order
/// numbers records without one). Header names must match the schema in order.
/// Categorical tokens extend the schema's dictionaries.
inline void read_records_csv(std::istream& in, SchemaConfig& schema, const std::function<void(Record&&)>& sink) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(Errc::parse_error, "line 1: missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split(line, ',');
  bool has_rid = !header.empty() && detail::trim(header.front()) == "rid";
  const std::size_t first = has_rid ? 1 : 0;
  if (header.size() - first != schema.attribute_count()) {
    throw Error(Errc::schema_mismatch, "header has " + std::to_string(header.size() - first) +
                                           " attribute columns, schema expects " +
                                           std::to_string(schema.attribute_count()));
  }
  for (std::size_t i = 0; i < schema.attribute_count(); ++i) {
    if (detail::trim(header[first + i]) != schema.attributes()[i].name) {
      throw Error(Errc::schema_mismatch, "header column '" + std::string(detail::trim(header[first + i])) +
                                             "' does not match schema attribute '" + schema.attributes()[i].name +
                                             "'");
    }
  }

  std::uint64_t arrival = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != header.size()) {
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields, found " +
                                         std::to_string(fields.size()));
    }
    Record r;
    if (has_rid) {
      const auto rid = detail::parse_u64(fields[0]);
      if (!rid) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": malformed rid");
      r.rid = RecordId{*rid};
    } else {
      r.rid = RecordId{arrival};
    }
    ++arrival;
    r.values.reserve(schema.attribute_count());
    for (std::size_t i = 0; i < schema.attribute_count(); ++i) {
      const auto v = schema.encode_or_insert(i, fields[first + i]);
      if (!v) {
        throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": malformed value '" +
                                           std::string(detail::trim(fields[first + i])) + "' for " +
                                           schema.attributes()[i].name);
      }
      r.values.push_back(*v);
    }
    sink(std::move(r));
  }
}

}  // namespace omnisketch
