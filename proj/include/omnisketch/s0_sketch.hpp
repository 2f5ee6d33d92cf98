#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "omnisketch/hashing.hpp"
#include "omnisketch/intersect.hpp"
#include "omnisketch/types.hpp"

namespace omnisketch {

struct GridDimensions {
  std::size_t width = 0;
  std::size_t depth = 0;
};

/// w = 1 + ceil(e / eps), d = ceil(ln(1 / delta)).
inline auto s0_dimensions(double epsilon, double delta) -> GridDimensions {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw Error(Errc::invalid_epsilon_delta, "epsilon and delta must lie in (0, 1)");
  }
  const auto width = 1 + static_cast<std::size_t>(std::ceil(std::numbers::e / epsilon));
  const auto depth = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(1.0 / delta))));
  return {width, depth};
}

/// Count-Min grids per attribute whose cells keep the full rid lists. Memory
/// grows linearly with the stream; used as the exact-sample baseline.
class S0Sketch {
 public:
  S0Sketch(std::size_t attribute_count, double epsilon, double delta, std::uint64_t seed)
      : S0Sketch(attribute_count, s0_dimensions(epsilon, delta), seed) {
    epsilon_ = epsilon;
    delta_ = delta;
  }

  S0Sketch(std::size_t attribute_count, GridDimensions dims, std::uint64_t seed)
      : schema_(Schema::point_only(attribute_count)), dims_(dims), seed_(seed) {
    if (attribute_count == 0) throw Error(Errc::schema_mismatch, "attribute_count must be >= 1");
    if (dims.width == 0) throw Error(Errc::invalid_width, "width must be >= 1");
    if (dims.depth == 0) throw Error(Errc::invalid_width, "depth must be >= 1");
    cells_.resize(attribute_count * dims.depth * dims.width);
    row_hashes_.reserve(attribute_count * dims.depth);
    for (std::size_t a = 0; a < attribute_count; ++a) {
      for (std::size_t j = 0; j < dims.depth; ++j) {
        row_hashes_.emplace_back(hashing::row_hash_seed(seed, a, 0, j), dims.width);
      }
    }
  }

  void insert(const Record& r) {
    validate_record(r, schema_);
    for (std::size_t a = 0; a < schema_.attribute_count(); ++a) {
      for (std::size_t j = 0; j < dims_.depth; ++j) {
        append_rid(cells_[cell_index(a, j, column(a, j, r.values[a]))], r.rid.value);
      }
    }
    ++n_;
  }

  /// Minimum over rows of the per-row intersection size.
  [[nodiscard]] auto estimate_min(const Query& q) const -> Estimate {
    check_point_query(q);
    std::uint64_t best = ~std::uint64_t{0};
    std::uint64_t n_max = 0;
    std::vector<SortedSpan> views(q.p());
    std::vector<const SortedSpan*> ptrs(q.p());
    for (std::size_t j = 0; j < dims_.depth; ++j) {
      for (std::size_t i = 0; i < q.p(); ++i) {
        views[i] = view_for(q.predicates[i], j);
        ptrs[i] = &views[i];
        n_max = std::max<std::uint64_t>(n_max, views[i].size());
      }
      best = std::min<std::uint64_t>(best, multiway_intersect(ptrs).common.size());
    }
    return exact_estimate(best, n_max);
  }

  /// Size of the intersection over every queried cell in every row.
  [[nodiscard]] auto estimate_cap(const Query& q) const -> Estimate {
    check_point_query(q);
    std::vector<SortedSpan> views;
    views.reserve(q.p() * dims_.depth);
    std::uint64_t n_max = 0;
    for (const auto& pred : q.predicates) {
      for (std::size_t j = 0; j < dims_.depth; ++j) {
        views.push_back(view_for(pred, j));
        n_max = std::max<std::uint64_t>(n_max, views.back().size());
      }
    }
    std::vector<const SortedSpan*> ptrs;
    ptrs.reserve(views.size());
    for (const auto& v : views) ptrs.push_back(&v);
    return exact_estimate(multiway_intersect(ptrs).common.size(), n_max);
  }

  [[nodiscard]] auto width() const noexcept -> std::size_t { return dims_.width; }
  [[nodiscard]] auto depth() const noexcept -> std::size_t { return dims_.depth; }
  [[nodiscard]] auto attribute_count() const noexcept -> std::size_t { return schema_.attribute_count(); }
  [[nodiscard]] auto stream_length() const noexcept -> std::uint64_t { return n_; }
  [[nodiscard]] auto seed() const noexcept -> std::uint64_t { return seed_; }
  [[nodiscard]] auto epsilon() const noexcept -> double { return epsilon_; }
  [[nodiscard]] auto delta() const noexcept -> double { return delta_; }

  /// Rid list of the cell at (attribute, row, 1-based column).
  [[nodiscard]] auto cell(std::size_t attribute, std::size_t row, std::size_t column) const
      -> std::span<const std::uint64_t> {
    return cells_.at(cell_index(attribute, row, column));
  }

  [[nodiscard]] auto column(std::size_t attribute, std::size_t row, AttributeValue v) const -> std::size_t {
    return row_hashes_[attribute * dims_.depth + row](v);
  }

  [[nodiscard]] auto memory_bytes() const noexcept -> std::size_t {
    std::size_t bytes = sizeof(*this) + row_hashes_.capacity() * sizeof(RowHash);
    for (const auto& c : cells_) bytes += sizeof(c) + c.capacity() * sizeof(std::uint64_t);
    return bytes;
  }

 private:
  [[nodiscard]] auto cell_index(std::size_t attribute, std::size_t row, std::size_t column) const
      -> std::size_t {
    return (attribute * dims_.depth + row) * dims_.width + (column - 1);
  }

  [[nodiscard]] auto view_for(const Predicate& pred, std::size_t row) const -> SortedSpan {
    const auto v = std::get<Equality>(pred.kind).value;
    return SortedSpan(cells_[cell_index(pred.attribute, row, column(pred.attribute, row, v))]);
  }

  void check_point_query(const Query& q) const {
    validate_query(q, schema_);
    for (const auto& pred : q.predicates) {
      if (pred.is_range()) {
        throw Error(Errc::range_predicate_unsupported, "the rid-list sketch answers equality predicates only");
      }
    }
  }

  // Rid lists are sets: a repeated rid is kept once.
  static void append_rid(std::vector<std::uint64_t>& list, std::uint64_t rid) {
    if (list.empty() || list.back() < rid) {
      list.push_back(rid);
      return;
    }
    auto it = std::lower_bound(list.begin(), list.end(), rid);
    if (it == list.end() || *it != rid) list.insert(it, rid);
  }

  static auto exact_estimate(std::uint64_t size, std::uint64_t n_max) -> Estimate {
    Estimate e;
    e.value = static_cast<double>(size);
    e.intersection_size = size;
    e.n_max = n_max;
    e.below_sanity = false;
    e.fallback_value = e.value;
    return e;
  }

  Schema schema_;
  GridDimensions dims_;
  std::uint64_t seed_;
  double epsilon_ = 0.0;
  double delta_ = 0.0;
  std::uint64_t n_ = 0;
  std::vector<RowHash> row_hashes_;
  std::vector<std::vector<std::uint64_t>> cells_;
};

}  // namespace omnisketch
