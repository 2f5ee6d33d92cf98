#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "omnisketch/params.hpp"

using namespace omnisketch;

namespace {

constexpr std::uint64_t kMB = 1024ULL * 1024 * 8;

// Independent long-double evaluation of the memory charge.
auto charge(std::size_t w, std::size_t d, std::size_t attrs, std::uint64_t B, double delta) -> long double {
  const long double b = std::min<long double>(
      63.0L, std::ceil(std::log2(4.0L * std::pow(static_cast<long double>(B), 2.5L) / delta)));
  return static_cast<long double>(w) * d * attrs * (32.0L + static_cast<long double>(B) * (b + 97.0L));
}

auto code_of(auto&& fn) -> Errc {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::parse_error;
}

}  // namespace

TEST(Params, FrozenDepthWidthBits) {
  EXPECT_EQ(omni_depth(0.1), 3u);
  EXPECT_EQ(omni_width(0.1, 3), 8u);
  EXPECT_EQ(fingerprint_bits(1000, 0.1), 31u);
  // independent evaluation of the same formulas
  EXPECT_EQ(omni_depth(0.1), static_cast<std::size_t>(std::ceil(std::log(20.0))));
  EXPECT_EQ(omni_width(0.1, 3), 1 + static_cast<std::size_t>(std::ceil(std::numbers::e * std::cbrt(11.0))));
  EXPECT_NEAR(std::log2(4.0 * std::pow(1000.0, 2.5) / 0.1), 30.236, 1e-3);
}

TEST(Params, FingerprintBitsCapped) {
  EXPECT_EQ(fingerprint_bits(std::uint64_t{1} << 40, 1e-6), kMaxFingerprintBits);
  EXPECT_EQ(fingerprint_bits(1, 0.5), 3u);
}

TEST(Params, DerivedSplit) {
  auto p = SketchParams::with_sample_size(0.1, 0.1, 4, 100, 0);
  EXPECT_DOUBLE_EQ(p.epsilon1, 0.1);
  EXPECT_NEAR(p.epsilon2, std::cbrt(0.1 / 1.1), 1e-12);
  EXPECT_DOUBLE_EQ(p.delta1, 0.05);
  EXPECT_DOUBLE_EQ(p.delta2, 0.05);
  // w = 1 + ceil(e / eps2)
  EXPECT_EQ(p.width, 1 + static_cast<std::size_t>(std::ceil(std::numbers::e / p.epsilon2)));
}

TEST(Configure, MaximalSampleSize) {
  for (std::uint64_t mb : {10, 50, 100, 200}) {
    const auto p = configure(0.1, 0.1, mb * kMB, 11);
    EXPECT_EQ(p.depth, 3u);
    EXPECT_EQ(p.width, 8u);
    EXPECT_LE(charge(p.width, p.depth, 11, p.sample_size, 0.1), static_cast<long double>(mb * kMB)) << mb;
    EXPECT_GT(charge(p.width, p.depth, 11, p.sample_size + 1, 0.1), static_cast<long double>(mb * kMB)) << mb;
    EXPECT_EQ(p.fingerprint_bits, fingerprint_bits(p.sample_size, 0.1));
    EXPECT_EQ(p.memory_bits, mb * kMB);
  }
}

TEST(Configure, TenMegabyteValue) {
  // frozen from the independent long-double charge above
  const auto p = configure(0.1, 0.1, 10 * kMB, 11);
  EXPECT_EQ(p.sample_size, 2425u);
  EXPECT_EQ(p.fingerprint_bits, 34u);
}

TEST(Configure, Errors) {
  EXPECT_EQ(code_of([] { (void)configure(0.1, 0.1, 8, 11); }), Errc::budget_too_small);
  EXPECT_EQ(code_of([] { (void)configure(0.3, 0.1, 10 * kMB, 11); }), Errc::epsilon_out_of_range);
  EXPECT_EQ(code_of([] { (void)configure(0.25, 0.1, 10 * kMB, 11); }), Errc::epsilon_out_of_range);
  EXPECT_EQ(code_of([] { (void)configure(0.1, 1.0, 10 * kMB, 11); }), Errc::invalid_epsilon_delta);
}

TEST(Configure, SmallestFeasibleBudget) {
  const auto w = omni_width(0.1, 3);
  const auto one = static_cast<std::uint64_t>(charge(w, 3, 2, 1, 0.1));
  EXPECT_EQ(configure(0.1, 0.1, one, 2).sample_size, 1u);
  EXPECT_EQ(code_of([&] { (void)configure(0.1, 0.1, one - 1, 2); }), Errc::budget_too_small);
}

TEST(Configure, MonotoneInBudget) {
  std::uint64_t prev = 0;
  for (std::uint64_t kb = 64; kb <= 8192; kb *= 2) {
    const auto B = configure(0.1, 0.1, kb * 8192, 5).sample_size;
    EXPECT_GE(B, prev);
    prev = B;
  }
}

TEST(Sanity, FormulaValues) {
  auto p = SketchParams::with_sample_size(0.1, 0.1, 4, 400, 0);
  const double L = std::log2(4.0 * 2 * 3 * 20.0 / 0.1);
  EXPECT_NEAR(sanity_threshold(p, 2), 3 * L / 0.01, 1e-9);
  EXPECT_NEAR(sanity_fallback(p, 2, 8000), 2 * 8000 * L / (400 * 0.01), 1e-9);
  EXPECT_NEAR(scaled_sanity_threshold(p, 2, 8000), 3 * 8000 * L / (400 * 0.01), 1e-9);
}
