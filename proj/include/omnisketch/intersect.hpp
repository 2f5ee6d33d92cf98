#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "omnisketch/types.hpp"

namespace omnisketch {

/// Anything with sorted, seekable access to a duplicate-free set of keys.
template <class T>
concept SortedSample = requires(const T& s, Fingerprint x) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s.min() } -> std::same_as<std::optional<Fingerprint>>;
  { s.seek(x) } -> std::same_as<std::optional<Fingerprint>>;
  { s.seek_after(x) } -> std::same_as<std::optional<Fingerprint>>;
};

/// Read-only view over a strictly increasing array of keys.
class SortedSpan {
 public:
  SortedSpan() = default;
  explicit SortedSpan(std::span<const std::uint64_t> data) : data_(data) {}

  [[nodiscard]] auto size() const noexcept -> std::size_t { return data_.size(); }
  [[nodiscard]] auto begin() const noexcept { return data_.begin(); }
  [[nodiscard]] auto end() const noexcept { return data_.end(); }

  [[nodiscard]] auto min() const -> std::optional<Fingerprint> {
    if (data_.empty()) return std::nullopt;
    return data_.front();
  }

  [[nodiscard]] auto seek(Fingerprint x) const -> std::optional<Fingerprint> {
    auto it = std::lower_bound(data_.begin(), data_.end(), x);
    if (it == data_.end()) return std::nullopt;
    return *it;
  }

  [[nodiscard]] auto seek_after(Fingerprint x) const -> std::optional<Fingerprint> {
    auto it = std::upper_bound(data_.begin(), data_.end(), x);
    if (it == data_.end()) return std::nullopt;
    return *it;
  }

 private:
  std::span<const std::uint64_t> data_;
};

struct IntersectionResult {
  std::vector<Fingerprint> common;
  std::uint64_t probes = 0;  // seek calls issued
};

/// Exact k-way intersection by leapfrogging: the current candidate is probed
/// in each input round-robin, and a miss jumps the candidate forward to the
/// probed input's lower-bound successor. Inputs are visited smallest first.
template <SortedSample T>
auto multiway_intersect(std::span<const T* const> inputs) -> IntersectionResult {
  IntersectionResult out;
  if (inputs.empty()) return out;
  for (const T* s : inputs) {
    if (s->size() == 0) return out;
  }

  std::vector<const T*> order(inputs.begin(), inputs.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const T* a, const T* b) { return a->size() < b->size(); });

  const std::size_t k = order.size();
  out.common.reserve(order.front()->size());

  Fingerprint candidate = *order.front()->min();
  std::size_t agreeing = 1;  // consecutive inputs (cyclically) known to hold candidate
  std::size_t next = 1 % k;

  while (true) {
    if (agreeing == k) {
      out.common.push_back(candidate);
      ++out.probes;
      auto succ = order[next]->seek_after(candidate);
      if (!succ) break;
      candidate = *succ;
      agreeing = 1;
      next = (next + 1) % k;
      continue;
    }
    ++out.probes;
    auto hit = order[next]->seek(candidate);
    if (!hit) break;
    if (*hit == candidate) {
      ++agreeing;
    } else {
      candidate = *hit;
      agreeing = 1;
    }
    next = (next + 1) % k;
  }
  return out;
}

template <SortedSample T>
auto multiway_intersect(const std::vector<const T*>& inputs) -> IntersectionResult {
  return multiway_intersect(std::span<const T* const>(inputs.data(), inputs.size()));
}

}  // namespace omnisketch
