#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "omnisketch/kmin_sample.hpp"
#include "omnisketch/types.hpp"

namespace omnisketch {

/// The dyadic range [key * 2^level + 1, (key + 1) * 2^level].
struct DyadicPiece {
  unsigned level = 0;
  std::uint64_t key = 0;

  [[nodiscard]] auto lo() const noexcept -> AttributeValue { return (key << level) + 1; }
  [[nodiscard]] auto hi() const noexcept -> AttributeValue { return (key + 1) << level; }

  friend constexpr auto operator==(const DyadicPiece&, const DyadicPiece&) -> bool = default;
};

/// Key of the level-`level` dyadic range holding v: ceil(v / 2^level) - 1.
[[nodiscard]] constexpr auto ladder_key(AttributeValue v, unsigned level) noexcept -> std::uint64_t {
  return (v - 1) >> level;
}

/// Minimal decomposition of [lo, hi] into disjoint dyadic ranges, in
/// ascending order. At most 2 * domain_bits pieces.
inline auto canonical_cover(AttributeValue lo, AttributeValue hi, unsigned domain_bits)
    -> std::vector<DyadicPiece> {
  if (domain_bits == 0 || domain_bits > 62) throw Error(Errc::domain_not_power_of_two, "domain_bits must lie in [1, 62]");
  const AttributeValue domain_max = AttributeValue{1} << domain_bits;
  if (lo < 1 || lo > hi || hi > domain_max) throw Error(Errc::out_of_domain, "range outside [1, 2^domain_bits]");

  std::vector<DyadicPiece> pieces;
  std::uint64_t start = lo - 1;  // zero-based, half-open [start, end)
  const std::uint64_t end = hi;
  while (start < end) {
    unsigned level = start == 0 ? domain_bits : std::min<unsigned>(std::countr_zero(start), domain_bits);
    while (start + (std::uint64_t{1} << level) > end) --level;
    pieces.push_back({level, start >> level});
    start += std::uint64_t{1} << level;
  }
  return pieces;
}

/// Several cells viewed as one thresholded K-minwise sample of their disjoint
/// union: the threshold is the smallest component threshold and only values
/// strictly below it are kept, so every kept value is known to every
/// component that could have sampled it.
class MergedCell {
 public:
  MergedCell() = default;

  template <class CellT>
  static auto merge(std::span<const CellT* const> parts) -> MergedCell {
    MergedCell m;
    for (const CellT* c : parts) {
      m.count_ += c->count();
      m.threshold_ = std::min(m.threshold_, c->threshold());
    }
    for (const CellT* c : parts) {
      for (Fingerprint fp : *c) {
        if (fp >= m.threshold_) break;
        m.sample_.push_back(fp);
      }
    }
    std::sort(m.sample_.begin(), m.sample_.end());
    m.sample_.erase(std::unique(m.sample_.begin(), m.sample_.end()), m.sample_.end());
    return m;
  }

  template <class CellT>
  static auto merge(const std::vector<const CellT*>& parts) -> MergedCell {
    return merge(std::span<const CellT* const>(parts.data(), parts.size()));
  }

  [[nodiscard]] auto count() const noexcept -> std::uint64_t { return count_; }
  [[nodiscard]] auto size() const noexcept -> std::size_t { return sample_.size(); }
  [[nodiscard]] auto threshold() const noexcept -> Fingerprint { return threshold_; }
  [[nodiscard]] auto begin() const noexcept { return sample_.begin(); }
  [[nodiscard]] auto end() const noexcept { return sample_.end(); }

  [[nodiscard]] auto min() const -> std::optional<Fingerprint> {
    if (sample_.empty()) return std::nullopt;
    return sample_.front();
  }

  [[nodiscard]] auto seek(Fingerprint x) const -> std::optional<Fingerprint> {
    auto it = std::lower_bound(sample_.begin(), sample_.end(), x);
    if (it == sample_.end()) return std::nullopt;
    return *it;
  }

  [[nodiscard]] auto seek_after(Fingerprint x) const -> std::optional<Fingerprint> {
    auto it = std::upper_bound(sample_.begin(), sample_.end(), x);
    if (it == sample_.end()) return std::nullopt;
    return *it;
  }

 private:
  std::uint64_t count_ = 0;
  Fingerprint threshold_ = kUnboundedThreshold;
  std::vector<Fingerprint> sample_;
};

}  // namespace omnisketch
