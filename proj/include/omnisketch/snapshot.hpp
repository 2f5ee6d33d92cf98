#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "omnisketch/format.hpp"
#include "omnisketch/omnisketch.hpp"
#include "omnisketch/params.hpp"

namespace omnisketch {

// Snapshot layout, version 1. All integers little-endian, fixed width;
// doubles as their IEEE-754 bit pattern in a u64. Row hashes and the rid
// hasher are re-derived from the master seed, so the format is tied to the
// hash families in hashing.hpp.
//
//   magic        8 bytes  "OMNISKCH"
//   version      u32
//   epsilon      f64      delta f64
//   memory_bits  u64      grid_count u64   width u64   depth u64
//   sample_size  u64      fingerprint_bits u32         master_seed u64
//   stream_len   u64
//   attributes   u32 n, then n x (u8 range_enabled, u8 domain_bits)
//   cells        u64 n, then n x (u64 count, u64 size, size x u64 fingerprint ascending)
//   catalog      u8 present; if 1: u32 n, then n x (string name, u8 kind,
//                u64 dictionary size, that many strings in code order)
//   string       u32 byte length + bytes

inline constexpr std::array<char, 8> kSnapshotMagic = {'O', 'M', 'N', 'I', 'S', 'K', 'C', 'H'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void u8(std::uint8_t v) { os_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void raw(const char* p, std::size_t n) { os_.write(p, static_cast<std::streamsize>(n)); }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) os_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  std::ostream& os_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& is) : is_(is) {}

  auto u8() -> std::uint8_t { return static_cast<std::uint8_t>(le(1)); }
  auto u32() -> std::uint32_t { return static_cast<std::uint32_t>(le(4)); }
  auto u64() -> std::uint64_t { return le(8); }
  auto f64() -> double { return std::bit_cast<double>(u64()); }
  auto str() -> std::string {
    const auto n = u32();
    std::string s(n, '\0');
    if (!is_.read(s.data(), n)) throw Error(Errc::snapshot_error, "truncated string");
    return s;
  }
  void raw(char* p, std::size_t n) {
    if (!is_.read(p, static_cast<std::streamsize>(n))) throw Error(Errc::snapshot_error, "truncated snapshot");
  }

 private:
  auto le(int bytes) -> std::uint64_t {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      const int c = is_.get();
      if (c == std::char_traits<char>::eof()) throw Error(Errc::snapshot_error, "truncated snapshot");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }

  std::istream& is_;
};

}  // namespace detail

template <class Compare>
void save_snapshot(std::ostream& os, const BasicOmniSketch<Compare>& sketch, const SchemaConfig* catalog = nullptr) {
  detail::BinaryWriter w(os);
  const auto& p = sketch.params();
  w.raw(kSnapshotMagic.data(), kSnapshotMagic.size());
  w.u32(kSnapshotVersion);
  w.f64(p.epsilon);
  w.f64(p.delta);
  w.u64(p.memory_bits);
  w.u64(p.attribute_count);
  w.u64(p.width);
  w.u64(p.depth);
  w.u64(p.sample_size);
  w.u32(p.fingerprint_bits);
  w.u64(p.master_seed);
  w.u64(sketch.stream_length());

  const auto& schema = sketch.schema();
  w.u32(static_cast<std::uint32_t>(schema.attribute_count()));
  for (const auto& a : schema.attributes) {
    w.u8(a.range_enabled() ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(a.domain_bits.value_or(0)));
  }

  const auto cells = sketch.cells();
  w.u64(cells.size());
  for (const auto& c : cells) {
    w.u64(c.count());
    w.u64(c.size());
    for (Fingerprint fp : c) w.u64(fp);
  }

  w.u8(catalog ? 1 : 0);
  if (catalog) {
    w.u32(static_cast<std::uint32_t>(catalog->attribute_count()));
    for (std::size_t i = 0; i < catalog->attribute_count(); ++i) {
      const auto& a = catalog->attributes()[i];
      w.str(a.name);
      w.u8(static_cast<std::uint8_t>(a.kind));
      const auto& dict = catalog->dictionary(i);
      w.u64(dict.size());
      for (const auto& v : dict) w.str(v);
    }
  }
  if (!os) throw Error(Errc::snapshot_error, "write failed");
}

template <class Compare = std::less<Fingerprint>>
struct Snapshot {
  BasicOmniSketch<Compare> sketch;
  std::optional<SchemaConfig> catalog;
};

template <class Compare = std::less<Fingerprint>>
auto load_snapshot(std::istream& is) -> Snapshot<Compare> {
  detail::BinaryReader r(is);
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kSnapshotMagic) throw Error(Errc::snapshot_error, "not a sketch snapshot (bad magic)");
  const auto version = r.u32();
  if (version != kSnapshotVersion) {
    throw Error(Errc::snapshot_error, "unsupported snapshot version " + std::to_string(version));
  }

  const double epsilon = r.f64();
  const double delta = r.f64();
  const auto memory_bits = r.u64();
  const auto grids = r.u64();
  const auto width = r.u64();
  const auto depth = r.u64();
  const auto sample_size = r.u64();
  const auto bits = r.u32();
  const auto seed = r.u64();
  const auto stream_length = r.u64();

  auto params = SketchParams::make(epsilon, delta, grids, width, depth, sample_size, seed);
  params.memory_bits = memory_bits;
  if (params.fingerprint_bits != bits) throw Error(Errc::snapshot_error, "fingerprint width mismatch");

  Schema schema;
  const auto attrs = r.u32();
  for (std::uint32_t i = 0; i < attrs; ++i) {
    const auto enabled = r.u8();
    const auto domain_bits = r.u8();
    schema.attributes.push_back(enabled ? AttributeDomain{domain_bits} : AttributeDomain{});
  }

  Snapshot<Compare> snap{BasicOmniSketch<Compare>(params, schema), std::nullopt};
  const auto cell_count = r.u64();
  if (cell_count != snap.sketch.cells().size()) throw Error(Errc::snapshot_error, "cell count mismatch");
  std::vector<Fingerprint> sample;
  for (std::uint64_t i = 0; i < cell_count; ++i) {
    const auto count = r.u64();
    const auto size = r.u64();
    if (size > sample_size || size > count) throw Error(Errc::snapshot_error, "corrupt cell " + std::to_string(i));
    sample.resize(size);
    for (auto& fp : sample) fp = r.u64();
    for (std::size_t k = 1; k < sample.size(); ++k) {
      if (sample[k - 1] >= sample[k]) throw Error(Errc::snapshot_error, "unsorted sample in cell " + std::to_string(i));
    }
    snap.sketch.restore_cell(i, count, sample);
  }
  snap.sketch.restore_stream_length(stream_length);

  if (r.u8() == 1) {
    const auto n = r.u32();
    std::vector<AttributeConfig> cfg;
    std::vector<std::vector<std::string>> dicts;
    for (std::uint32_t i = 0; i < n; ++i) {
      AttributeConfig a;
      a.name = r.str();
      a.kind = static_cast<AttributeKind>(r.u8());
      a.domain_bits = i < schema.attributes.size() ? schema.attributes[i].domain_bits : std::nullopt;
      const auto entries = r.u64();
      std::vector<std::string> values;
      values.reserve(entries);
      for (std::uint64_t k = 0; k < entries; ++k) values.push_back(r.str());
      cfg.push_back(std::move(a));
      dicts.push_back(std::move(values));
    }
    SchemaConfig catalog(std::move(cfg));
    for (std::size_t i = 0; i < dicts.size(); ++i) catalog.restore_dictionary(i, std::move(dicts[i]));
    snap.catalog = std::move(catalog);
  }
  return snap;
}

}  // namespace omnisketch
