#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

#include "omnisketch/types.hpp"

namespace omnisketch {

/// Fingerprints above 63 bits would collide with the unbounded-threshold
/// sentinel, so b is capped here.
inline constexpr unsigned kMaxFingerprintBits = 63;

/// Per-sample bookkeeping cost in the memory model: three 32-bit tree links and
/// one colour bit, on top of the b-bit fingerprint. Each cell also carries a
/// 32-bit counter.
inline constexpr std::uint64_t kSampleOverheadBits = 3 * 32 + 1;
inline constexpr std::uint64_t kCellCounterBits = 32;

/// d = ceil(ln(2 / delta)).
inline auto omni_depth(double delta) -> std::size_t {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(2.0 / delta))));
}

/// w = 1 + ceil(e * ((eps + 1) / eps)^(1/d)).
inline auto omni_width(double epsilon, std::size_t depth) -> std::size_t {
  const double base = (epsilon + 1.0) / epsilon;
  return 1 + static_cast<std::size_t>(std::ceil(std::numbers::e * std::pow(base, 1.0 / static_cast<double>(depth))));
}

/// b = ceil(log2(4 * B^2.5 / delta)), capped at kMaxFingerprintBits.
inline auto fingerprint_bits(std::uint64_t sample_size, double delta) -> unsigned {
  const double raw = std::ceil(std::log2(4.0 * std::pow(static_cast<double>(sample_size), 2.5) / delta));
  if (raw < 1.0) return 1;
  return static_cast<unsigned>(std::min<double>(raw, kMaxFingerprintBits));
}

/// Bits charged by the memory model for w * d * grids cells holding up to B
/// samples each.
inline auto required_bits(std::size_t width, std::size_t depth, std::size_t grids, std::uint64_t sample_size,
                          double delta) -> u128 {
  const u128 per_cell =
      kCellCounterBits + u128{sample_size} * (fingerprint_bits(sample_size, delta) + kSampleOverheadBits);
  return u128{width} * depth * grids * per_cell;
}

struct SketchParams {
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint64_t memory_bits = 0;
  std::size_t attribute_count = 1;  // attribute grids the budget is split across
  std::size_t width = 1;
  std::size_t depth = 1;
  std::uint64_t sample_size = 1;  // B
  unsigned fingerprint_bits = 1;  // b
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  std::uint64_t master_seed = 0;

  /// Parameters with explicit grid dimensions and sample size. The memory
  /// field is filled with what the configuration actually charges.
  static auto make(double epsilon, double delta, std::size_t attribute_count, std::size_t width,
                   std::size_t depth, std::uint64_t sample_size, std::uint64_t seed) -> SketchParams {
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
      throw Error(Errc::invalid_epsilon_delta, "epsilon and delta must lie in (0, 1)");
    }
    if (width == 0 || depth == 0) throw Error(Errc::invalid_width, "width and depth must be >= 1");
    if (sample_size == 0) throw Error(Errc::invalid_sample_size, "sample size B must be >= 1");
    if (attribute_count == 0) throw Error(Errc::schema_mismatch, "attribute_count must be >= 1");
    SketchParams p;
    p.epsilon = epsilon;
    p.delta = delta;
    p.attribute_count = attribute_count;
    p.width = width;
    p.depth = depth;
    p.sample_size = sample_size;
    p.fingerprint_bits = omnisketch::fingerprint_bits(sample_size, delta);
    p.epsilon1 = epsilon;
    p.epsilon2 = std::pow(epsilon / (1.0 + epsilon), 1.0 / static_cast<double>(depth));
    p.delta1 = delta / 2.0;
    p.delta2 = delta / 2.0;
    const auto bits = required_bits(width, depth, attribute_count, sample_size, delta);
    p.memory_bits = bits > ~std::uint64_t{0} ? ~std::uint64_t{0} : static_cast<std::uint64_t>(bits);
    p.master_seed = seed;
    return p;
  }

  /// Derived (w, d) from (eps, delta) with an explicit B.
  static auto with_sample_size(double epsilon, double delta, std::size_t attribute_count,
                               std::uint64_t sample_size, std::uint64_t seed) -> SketchParams {
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
      throw Error(Errc::invalid_epsilon_delta, "epsilon and delta must lie in (0, 1)");
    }
    const auto d = omni_depth(delta);
    return make(epsilon, delta, attribute_count, omni_width(epsilon, d), d, sample_size, seed);
  }

  [[nodiscard]] auto satisfies_budget(std::uint64_t sample) const -> bool {
    return required_bits(width, depth, attribute_count, sample, delta) <= memory_bits;
  }
};

/// Picks the largest B whose memory charge fits `memory_bits`, by integer
/// bisection over [1, M / (w d |A|) + 1).
inline auto configure(double epsilon, double delta, std::uint64_t memory_bits, std::size_t attribute_count,
                      std::uint64_t seed = 0) -> SketchParams {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw Error(Errc::invalid_epsilon_delta, "epsilon and delta must lie in (0, 1)");
  }
  if (epsilon >= 0.25) throw Error(Errc::epsilon_out_of_range, "epsilon must be below 0.25");
  if (attribute_count == 0) throw Error(Errc::schema_mismatch, "attribute_count must be >= 1");

  const auto d = omni_depth(delta);
  const auto w = omni_width(epsilon, d);
  const auto fits = [&](std::uint64_t b) { return required_bits(w, d, attribute_count, b, delta) <= memory_bits; };
  if (!fits(1)) {
    throw Error(Errc::budget_too_small, "memory budget of " + std::to_string(memory_bits) +
                                            " bits cannot hold one sample per cell");
  }

  std::uint64_t lo = 1;
  std::uint64_t hi = memory_bits / (static_cast<std::uint64_t>(w) * d * attribute_count) + 1;
  while (lo + 1 < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (fits(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  auto p = SketchParams::make(epsilon, delta, attribute_count, w, d, lo, seed);
  p.memory_bits = memory_bits;
  return p;
}

/// log2(4 p d sqrt(B) / delta), the shared term of the sampling bounds.
inline auto sanity_log(std::size_t predicates, std::size_t depth, std::uint64_t sample_size, double delta)
    -> double {
  return std::log2(4.0 * static_cast<double>(predicates) * static_cast<double>(depth) *
                   std::sqrt(static_cast<double>(sample_size)) / delta);
}

/// Minimum |S_cap| for the (eps, delta) guarantee: 3 log2(4pd sqrt(B)/delta) / eps^2.
inline auto sanity_threshold(const SketchParams& p, std::size_t predicates) -> double {
  return 3.0 * sanity_log(predicates, p.depth, p.sample_size, p.delta) / (p.epsilon * p.epsilon);
}

/// Estimate returned below the sanity threshold: 2 n_max log2(...) / (B eps^2).
inline auto sanity_fallback(const SketchParams& p, std::size_t predicates, std::uint64_t n_max) -> double {
  return 2.0 * static_cast<double>(n_max) * sanity_log(predicates, p.depth, p.sample_size, p.delta) /
         (static_cast<double>(p.sample_size) * p.epsilon * p.epsilon);
}

/// Alternative threshold scaled by n_max / B, as used when the scaled
/// estimator is always returned. Informational; the flag uses sanity_threshold.
inline auto scaled_sanity_threshold(const SketchParams& p, std::size_t predicates, std::uint64_t n_max)
    -> double {
  return 1.5 * sanity_fallback(p, predicates, n_max);
}

}  // namespace omnisketch
