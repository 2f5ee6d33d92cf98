#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "omnisketch/types.hpp"

namespace omnisketch {

namespace hashing {

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

[[nodiscard]] constexpr auto splitmix64(std::uint64_t x) noexcept -> std::uint64_t {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// x mod (2^61 - 1). Valid for x < 2^124; a*x + b with a, b, x < 2^61 stays below 2^123.
[[nodiscard]] constexpr auto mod_mersenne61(u128 x) noexcept -> std::uint64_t {
  auto lo = static_cast<std::uint64_t>(x & kMersenne61) + static_cast<std::uint64_t>(x >> 61);
  lo = (lo & kMersenne61) + (lo >> 61);
  return lo >= kMersenne61 ? lo - kMersenne61 : lo;
}

/// Derives an independent 64-bit seed for a named slot (grid, row, ...) from
/// the master seed. Order-free: the seed for a slot never depends on which
/// other slots exist.
[[nodiscard]] constexpr auto derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                         std::uint64_t c = 0) noexcept -> std::uint64_t {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ (b * 0xd1b54a32d192ed03ULL));
  s = splitmix64(s ^ (c * 0x8cb92ba72f3d8dd7ULL));
  return s;
}

/// Seed of the row hash for (attribute, dyadic level, row). Point-only
/// attributes use level 0, so point sketches built from one master seed share
/// their row hashes regardless of sketch type.
[[nodiscard]] constexpr auto row_hash_seed(std::uint64_t master, std::size_t attribute, std::size_t level,
                                           std::size_t row) noexcept -> std::uint64_t {
  return derive_seed(master, attribute + 1, level + 1, row + 1);
}

[[nodiscard]] constexpr auto rid_hash_seed(std::uint64_t master) noexcept -> std::uint64_t {
  return derive_seed(master, 0, 0, 0);
}

}  // namespace hashing

/// One draw from the pairwise-independent family ((a*x + b) mod p) mod w,
/// p = 2^61 - 1. Columns are 1-based, in [1, w].
class RowHash {
 public:
  RowHash() = default;

  RowHash(std::uint64_t seed, std::size_t width) : width_(width) {
    if (width == 0) throw Error(Errc::invalid_width, "row hash width must be >= 1");
    std::mt19937_64 rng(seed);
    do {
      a_ = rng() & hashing::kMersenne61;
    } while (a_ == 0 || a_ == hashing::kMersenne61);
    do {
      b_ = rng() & hashing::kMersenne61;
    } while (b_ == hashing::kMersenne61);
  }

  [[nodiscard]] auto operator()(AttributeValue v) const noexcept -> std::size_t {
    const std::uint64_t x = hashing::mod_mersenne61(v);
    const auto h = hashing::mod_mersenne61(static_cast<u128>(a_) * x + b_);
    return static_cast<std::size_t>(h % width_) + 1;
  }

  [[nodiscard]] auto width() const noexcept -> std::size_t { return width_; }
  [[nodiscard]] auto multiplier() const noexcept -> std::uint64_t { return a_; }
  [[nodiscard]] auto offset() const noexcept -> std::uint64_t { return b_; }

 private:
  std::uint64_t a_ = 1;
  std::uint64_t b_ = 0;
  std::size_t width_ = 1;
};

[[nodiscard]] inline auto new_row_hash(std::uint64_t seed, std::size_t width) -> RowHash {
  return RowHash(seed, width);
}

/// The global rid hash g: a 64-bit mixer truncated to its top `bits` bits.
class RidHasher {
 public:
  RidHasher() = default;

  RidHasher(std::uint64_t seed, unsigned bits) : key_(hashing::splitmix64(seed)), bits_(bits) {
    if (bits < 1 || bits > 64) throw Error(Errc::invalid_bit_width, "rid fingerprint width must lie in [1, 64]");
  }

  [[nodiscard]] auto operator()(RecordId rid) const noexcept -> Fingerprint {
    const std::uint64_t h = hashing::splitmix64(rid.value ^ key_);
    return bits_ == 64 ? h : h >> (64 - bits_);
  }

  [[nodiscard]] auto bits() const noexcept -> unsigned { return bits_; }
  [[nodiscard]] auto max_fingerprint() const noexcept -> Fingerprint {
    return bits_ == 64 ? ~Fingerprint{0} : (Fingerprint{1} << bits_) - 1;
  }

 private:
  std::uint64_t key_ = 0;
  unsigned bits_ = 64;
};

}  // namespace omnisketch
