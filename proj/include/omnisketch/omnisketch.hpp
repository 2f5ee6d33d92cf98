#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "omnisketch/hashing.hpp"
#include "omnisketch/intersect.hpp"
#include "omnisketch/kmin_sample.hpp"
#include "omnisketch/params.hpp"
#include "omnisketch/range.hpp"
#include "omnisketch/types.hpp"

namespace omnisketch {

/// Allocation size of one libstdc++ red-black node holding a 64-bit key
/// (32-byte node header + key, rounded to the 16-byte malloc granule).
inline constexpr std::size_t kSampleNodeBytes = 48;

/// Ratio allowance of structural_bytes() over the memory model: the model
/// charges b + 97 bits per sample and 32 bits per cell, the containers spend
/// 384 bits per sample and sizeof(Cell) per cell.
inline constexpr double kMemoryOverheadFactor = 3.0;

/// A queried cell: either a stored cell or a merge of several stored cells.
template <class CellT>
class QueryCell {
 public:
  explicit QueryCell(const CellT* cell) : impl_(cell) {}
  explicit QueryCell(MergedCell merged) : impl_(std::move(merged)) {}

  [[nodiscard]] auto count() const -> std::uint64_t {
    return std::visit([](const auto& c) { return deref(c).count(); }, impl_);
  }
  [[nodiscard]] auto size() const -> std::size_t {
    return std::visit([](const auto& c) { return deref(c).size(); }, impl_);
  }
  [[nodiscard]] auto min() const -> std::optional<Fingerprint> {
    return std::visit([](const auto& c) { return deref(c).min(); }, impl_);
  }
  [[nodiscard]] auto seek(Fingerprint x) const -> std::optional<Fingerprint> {
    return std::visit([x](const auto& c) { return deref(c).seek(x); }, impl_);
  }
  [[nodiscard]] auto seek_after(Fingerprint x) const -> std::optional<Fingerprint> {
    return std::visit([x](const auto& c) { return deref(c).seek_after(x); }, impl_);
  }

 private:
  static auto deref(const CellT* c) -> const CellT& { return *c; }
  static auto deref(const MergedCell& c) -> const MergedCell& { return c; }

  std::variant<const CellT*, MergedCell> impl_;
};

/// The sampled multi-attribute sketch. One w x d grid of K-minwise cells per
/// point attribute; range-enabled attributes get one grid per dyadic level
/// 0 .. domain_bits - 1 (level 0 doubles as the point grid).
///
/// Single writer. Estimation is const and may run concurrently once
/// ingestion is quiescent.
template <class Compare = std::less<Fingerprint>>
class BasicOmniSketch {
 public:
  using cell_type = BasicCell<Compare>;

  explicit BasicOmniSketch(const SketchParams& params)
      : BasicOmniSketch(params, Schema::point_only(params.attribute_count)) {}

  BasicOmniSketch(const SketchParams& params, Schema schema) : params_(params), schema_(std::move(schema)) {
    validate_schema(schema_);
    if (params_.attribute_count != schema_.grid_count()) {
      throw Error(Errc::schema_mismatch, "parameters budget " + std::to_string(params_.attribute_count) +
                                             " attribute grids, schema needs " +
                                             std::to_string(schema_.grid_count()));
    }
    if (params_.width == 0 || params_.depth == 0) throw Error(Errc::invalid_width, "width and depth must be >= 1");
    if (params_.sample_size == 0) throw Error(Errc::invalid_sample_size, "sample size B must be >= 1");
    if (params_.fingerprint_bits == 0 || params_.fingerprint_bits > kMaxFingerprintBits) {
      throw Error(Errc::invalid_bit_width, "fingerprint bits must lie in [1, 63]");
    }

    rid_hasher_ = RidHasher(hashing::rid_hash_seed(params_.master_seed), params_.fingerprint_bits);
    std::size_t grid = 0;
    for (std::size_t a = 0; a < schema_.attribute_count(); ++a) {
      grid_offset_.push_back(grid);
      const std::size_t levels = levels_of(a);
      for (std::size_t level = 0; level < levels; ++level, ++grid) {
        for (std::size_t j = 0; j < params_.depth; ++j) {
          row_hashes_.emplace_back(hashing::row_hash_seed(params_.master_seed, a, level, j), params_.width);
        }
      }
    }
    cells_.assign(grid * params_.depth * params_.width, cell_type(params_.sample_size));
  }

  void insert(const Record& r) {
    validate_record(r, schema_);
    const Fingerprint fp = rid_hasher_(r.rid);
    for (std::size_t a = 0; a < schema_.attribute_count(); ++a) {
      const auto& domain = schema_.attributes[a];
      const std::size_t levels = levels_of(a);
      for (std::size_t level = 0; level < levels; ++level) {
        const std::uint64_t key =
            domain.range_enabled() ? ladder_key(r.values[a], static_cast<unsigned>(level)) : r.values[a];
        const std::size_t grid = grid_offset_[a] + level;
        for (std::size_t j = 0; j < params_.depth; ++j) {
          cells_[cell_index(grid, j, column_of(grid, j, key))].insert(fp);
        }
      }
    }
    ++n_;
  }

  /// Point and range estimation. Equality predicates read level-0 cells;
  /// range predicates read their canonical cover, merged per row. A range
  /// spanning the whole domain matches every record and is dropped.
  [[nodiscard]] auto estimate(const Query& q) const -> Estimate {
    validate_query(q, schema_);
    std::vector<QueryCell<cell_type>> cells;
    cells.reserve(q.p() * params_.depth);
    std::size_t predicates = 0;

    for (const auto& pred : q.predicates) {
      const auto& domain = schema_.attributes[pred.attribute];
      if (const auto* eq = std::get_if<Equality>(&pred.kind)) {
        const std::uint64_t key = domain.range_enabled() ? ladder_key(eq->value, 0) : eq->value;
        const std::size_t grid = grid_offset_[pred.attribute];
        for (std::size_t j = 0; j < params_.depth; ++j) {
          cells.emplace_back(&cells_[cell_index(grid, j, column_of(grid, j, key))]);
        }
        ++predicates;
        continue;
      }

      const auto& range = std::get<Range>(pred.kind);
      if (!domain.range_enabled()) {
        throw Error(Errc::range_predicate_unsupported,
                    "attribute a" + std::to_string(pred.attribute + 1) + " is not range-enabled");
      }
      const auto cover = canonical_cover(range.lo, range.hi, *domain.domain_bits);
      if (cover.size() == 1 && cover.front().level == *domain.domain_bits) continue;
      ++predicates;
      for (std::size_t j = 0; j < params_.depth; ++j) {
        if (cover.size() == 1) {
          const std::size_t grid = grid_offset_[pred.attribute] + cover.front().level;
          cells.emplace_back(&cells_[cell_index(grid, j, column_of(grid, j, cover.front().key))]);
          continue;
        }
        std::vector<const cell_type*> parts;
        parts.reserve(cover.size());
        for (const auto& piece : cover) {
          const std::size_t grid = grid_offset_[pred.attribute] + piece.level;
          parts.push_back(&cells_[cell_index(grid, j, column_of(grid, j, piece.key))]);
        }
        cells.emplace_back(MergedCell::merge(parts));
      }
    }

    if (cells.empty()) {
      Estimate e;
      e.value = static_cast<double>(n_);
      e.intersection_size = n_;
      e.n_max = n_;
      e.below_sanity = false;
      e.fallback_value = e.value;
      return e;
    }
    return estimate_from_cells(std::span<const QueryCell<cell_type>>(cells), predicates);
  }

  /// (max_c cnt_c / |S_c|) * |S_cap|, which equals (n_max / B) * |S_cap| when
  /// every queried sample is full and is exact when none has overflowed.
  template <SortedSample CellView>
  [[nodiscard]] auto estimate_from_cells(std::span<const CellView> cells, std::size_t predicates) const
      -> Estimate {
    Estimate e;
    double scale = 0.0;
    std::vector<const CellView*> ptrs;
    ptrs.reserve(cells.size());
    for (const auto& c : cells) {
      e.n_max = std::max<std::uint64_t>(e.n_max, c.count());
      if (c.size() > 0) {
        scale = std::max(scale, static_cast<double>(c.count()) / static_cast<double>(c.size()));
      }
      ptrs.push_back(&c);
    }
    const auto inter = multiway_intersect(std::span<const CellView* const>(ptrs));
    e.intersection_size = inter.common.size();
    e.value = inter.common.empty() ? 0.0 : scale * static_cast<double>(e.intersection_size);
    e.sanity_threshold = sanity_threshold(params_, predicates);
    e.below_sanity = static_cast<double>(e.intersection_size) < e.sanity_threshold;
    e.fallback_value = sanity_fallback(params_, predicates, e.n_max);
    return e;
  }

  [[nodiscard]] auto params() const noexcept -> const SketchParams& { return params_; }
  [[nodiscard]] auto schema() const noexcept -> const Schema& { return schema_; }
  [[nodiscard]] auto stream_length() const noexcept -> std::uint64_t { return n_; }
  [[nodiscard]] auto rid_hasher() const noexcept -> const RidHasher& { return rid_hasher_; }

  [[nodiscard]] auto levels_of(std::size_t attribute) const -> std::size_t {
    const auto& d = schema_.attributes.at(attribute).domain_bits;
    return d ? *d : 1;
  }

  /// 1-based column of `key` in row `row` of the given attribute level.
  [[nodiscard]] auto column(std::size_t attribute, std::size_t level, std::size_t row, std::uint64_t key) const
      -> std::size_t {
    return column_of(grid_offset_.at(attribute) + level, row, key);
  }

  [[nodiscard]] auto cell(std::size_t attribute, std::size_t level, std::size_t row, std::size_t column) const
      -> const cell_type& {
    return cells_.at(cell_index(grid_offset_.at(attribute) + level, row, column));
  }

  /// All cells in grid-major, then row-major, then column order.
  [[nodiscard]] auto cells() const noexcept -> std::span<const cell_type> { return cells_; }

  /// Loads persisted state; used by snapshot readers.
  template <class SortedRange>
  void restore_cell(std::size_t index, std::uint64_t count, const SortedRange& sorted) {
    cells_.at(index).restore(count, sorted);
  }
  void restore_stream_length(std::uint64_t n) noexcept { n_ = n; }

  /// Bytes held by cells and their samples.
  [[nodiscard]] auto structural_bytes() const noexcept -> std::size_t {
    std::size_t bytes = cells_.size() * sizeof(cell_type);
    for (const auto& c : cells_) bytes += c.size() * kSampleNodeBytes;
    return bytes;
  }

  [[nodiscard]] auto memory_bytes() const noexcept -> std::size_t {
    return sizeof(*this) + structural_bytes() + row_hashes_.size() * sizeof(RowHash) +
           grid_offset_.size() * sizeof(std::size_t);
  }

 private:
  [[nodiscard]] auto cell_index(std::size_t grid, std::size_t row, std::size_t column) const noexcept
      -> std::size_t {
    return (grid * params_.depth + row) * params_.width + (column - 1);
  }

  [[nodiscard]] auto column_of(std::size_t grid, std::size_t row, std::uint64_t key) const noexcept
      -> std::size_t {
    return row_hashes_[grid * params_.depth + row](key);
  }

  SketchParams params_;
  Schema schema_;
  RidHasher rid_hasher_;
  std::uint64_t n_ = 0;
  std::vector<std::size_t> grid_offset_;
  std::vector<RowHash> row_hashes_;
  std::vector<cell_type> cells_;
};

using OmniSketch = BasicOmniSketch<>;

}  // namespace omnisketch
