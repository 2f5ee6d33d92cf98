#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <set>

#include "omnisketch/types.hpp"

namespace omnisketch {

/// Threshold reported by a cell whose sample is not yet full. Strictly above
/// every admissible fingerprint (sketch fingerprints use at most 63 bits).
inline constexpr Fingerprint kUnboundedThreshold = std::numeric_limits<Fingerprint>::max();

/// Ordering that counts how often it is invoked, for work-bound checks.
struct CountingLess {
  static inline thread_local std::uint64_t comparisons = 0;

  auto operator()(Fingerprint a, Fingerprint b) const noexcept -> bool {
    ++comparisons;
    return a < b;
  }
};

/// One sketch cell: an arrival counter plus a bounded K-minwise sample holding
/// the `capacity` smallest distinct fingerprints offered so far.
///
/// The sample is an ordered set (a red-black tree in libstdc++), giving
/// O(log B) insert, evict and lower-bound, and O(1) access to the maximum.
template <class Compare = std::less<Fingerprint>>
class BasicCell {
 public:
  using sample_type = std::set<Fingerprint, Compare>;
  using const_iterator = typename sample_type::const_iterator;

  explicit BasicCell(std::size_t capacity = 1) : capacity_(capacity) {}

  void insert(Fingerprint fp) {
    ++count_;
    if (sample_.size() < capacity_) {
      sample_.insert(fp);
      return;
    }
    // Full: admit only below the current maximum, evicting it.
    if (sample_.key_comp()(fp, *sample_.rbegin())) {
      if (sample_.insert(fp).second) sample_.erase(std::prev(sample_.end()));
    }
  }

  [[nodiscard]] auto count() const noexcept -> std::uint64_t { return count_; }
  [[nodiscard]] auto size() const noexcept -> std::size_t { return sample_.size(); }
  [[nodiscard]] auto empty() const noexcept -> bool { return sample_.empty(); }
  [[nodiscard]] auto capacity() const noexcept -> std::size_t { return capacity_; }
  [[nodiscard]] auto full() const noexcept -> bool { return sample_.size() >= capacity_; }

  /// s_max when the sample is full, otherwise kUnboundedThreshold.
  [[nodiscard]] auto threshold() const noexcept -> Fingerprint {
    return full() && !sample_.empty() ? *sample_.rbegin() : kUnboundedThreshold;
  }

  [[nodiscard]] auto begin() const noexcept -> const_iterator { return sample_.begin(); }
  [[nodiscard]] auto end() const noexcept -> const_iterator { return sample_.end(); }

  [[nodiscard]] auto min() const -> std::optional<Fingerprint> {
    if (sample_.empty()) return std::nullopt;
    return *sample_.begin();
  }

  /// Smallest sampled value >= fp.
  [[nodiscard]] auto seek(Fingerprint fp) const -> std::optional<Fingerprint> {
    auto it = sample_.lower_bound(fp);
    if (it == sample_.end()) return std::nullopt;
    return *it;
  }

  /// Smallest sampled value > fp.
  [[nodiscard]] auto seek_after(Fingerprint fp) const -> std::optional<Fingerprint> {
    auto it = sample_.upper_bound(fp);
    if (it == sample_.end()) return std::nullopt;
    return *it;
  }

  [[nodiscard]] auto contains(Fingerprint fp) const -> bool { return sample_.find(fp) != sample_.end(); }

  /// Rebuilds a cell from persisted state. `sorted` must be strictly increasing.
  template <class SortedRange>
  void restore(std::uint64_t count, const SortedRange& sorted) {
    sample_.clear();
    for (auto fp : sorted) sample_.insert(sample_.end(), fp);
    count_ = count;
  }

  friend auto operator==(const BasicCell& a, const BasicCell& b) -> bool {
    return a.count_ == b.count_ && a.capacity_ == b.capacity_ && a.sample_ == b.sample_;
  }

 private:
  std::uint64_t count_ = 0;
  std::size_t capacity_;
  sample_type sample_;
};

using Cell = BasicCell<>;

}  // namespace omnisketch
