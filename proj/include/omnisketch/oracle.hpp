#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "omnisketch/kmin_sample.hpp"
#include "omnisketch/types.hpp"

namespace omnisketch {

/// Keeps the whole stream and answers queries exactly by linear scan.
class RecordStore {
 public:
  RecordStore() = default;
  explicit RecordStore(std::vector<Record> records) : records_(std::move(records)) {}

  void insert(Record r) { records_.push_back(std::move(r)); }

  [[nodiscard]] auto exact_count(const Query& q) const -> std::uint64_t {
    return static_cast<std::uint64_t>(
        std::count_if(records_.begin(), records_.end(), [&](const Record& r) { return q.matches(r); }));
  }

  [[nodiscard]] auto size() const noexcept -> std::size_t { return records_.size(); }
  [[nodiscard]] auto records() const noexcept -> std::span<const Record> { return records_; }

 private:
  std::vector<Record> records_;
};

struct KminReference {
  std::uint64_t count = 0;
  std::vector<Fingerprint> sample;  // ascending
  Fingerprint threshold = kUnboundedThreshold;
};

/// Reference cell state: sort the offers, drop duplicates, keep the B smallest.
inline auto kmin_oracle(std::span<const Fingerprint> offers, std::size_t capacity) -> KminReference {
  KminReference ref;
  ref.count = offers.size();
  ref.sample.assign(offers.begin(), offers.end());
  std::sort(ref.sample.begin(), ref.sample.end());
  ref.sample.erase(std::unique(ref.sample.begin(), ref.sample.end()), ref.sample.end());
  if (ref.sample.size() > capacity) ref.sample.resize(capacity);
  if (ref.sample.size() == capacity && capacity > 0) ref.threshold = ref.sample.back();
  return ref;
}

}  // namespace omnisketch
