/// @file snapshot.hpp
/// @brief Binary state snapshots.
///
/// Layout, all little-endian:
///   8 bytes   "ISMSNAP1"
///   u32 nx, u32 nz
///   f64 Lx, Lz, t, f, s, g, theta0
///   4 arrays of nx*nz f64, x fastest: u_Sx, u_Sz, u_T, theta_S

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "ism/grid.hpp"

namespace ism {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 8> kSnapshotMagic = {'I', 'S', 'M', 'S', 'N', 'A', 'P', '1'};
inline constexpr std::size_t kSnapshotHeaderBytes = 8 + 2 * 4 + 7 * 8;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

inline void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

inline double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(v);
}

}  // namespace detail

inline std::vector<unsigned char> encode_snapshot(const State& st) {
  const Grid& g = st.grid();
  std::vector<unsigned char> out(kSnapshotMagic.begin(), kSnapshotMagic.end());
  out.reserve(kSnapshotHeaderBytes + 4 * g.size() * 8);
  detail::put_u32(out, static_cast<std::uint32_t>(g.nx()));
  detail::put_u32(out, static_cast<std::uint32_t>(g.nz()));
  for (double v : {g.lx(), g.lz(), st.t, st.constants.f, st.constants.s, st.constants.g, st.constants.theta0}) {
    detail::put_f64(out, v);
  }
  for (const ScalarField* f : {&st.u_s.x, &st.u_s.z, &st.u_t, &st.theta_s}) {
    for (double v : f->values()) detail::put_f64(out, v);
  }
  return out;
}

/// Parses a snapshot image. If expected is given, the grid must match it.
inline State decode_snapshot(const std::vector<unsigned char>& bytes, const std::optional<Grid>& expected = {}) {
  if (bytes.size() < kSnapshotHeaderBytes) throw FormatError("snapshot truncated: header incomplete");
  if (!std::equal(kSnapshotMagic.begin(), kSnapshotMagic.end(), bytes.begin())) {
    throw FormatError("not a snapshot: bad magic bytes");
  }
  const unsigned char* p = bytes.data() + 8;
  const std::uint32_t nx = detail::get_u32(p);
  const std::uint32_t nz = detail::get_u32(p + 4);
  p += 8;
  double hdr[7];
  for (double& h : hdr) {
    h = detail::get_f64(p);
    p += 8;
  }
  const std::uint64_t n = static_cast<std::uint64_t>(nx) * nz;
  const std::uint64_t want = kSnapshotHeaderBytes + 4 * n * 8;
  if (bytes.size() != want) {
    throw FormatError("snapshot payload is " + std::to_string(bytes.size() - kSnapshotHeaderBytes) +
                      " bytes but nx*nz = " + std::to_string(n) + " needs " + std::to_string(4 * n * 8));
  }
  Grid grid;
  try {
    grid = Grid(static_cast<int>(nx), static_cast<int>(nz), hdr[0], hdr[1]);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("snapshot header describes an invalid grid: ") + e.what());
  }
  if (expected && !(*expected == grid)) {
    throw FormatError("snapshot grid " + std::to_string(nx) + "x" + std::to_string(nz) + " does not match expected " +
                      std::to_string(expected->nx()) + "x" + std::to_string(expected->nz()));
  }
  State st(grid, Constants{hdr[3], hdr[4], hdr[5], hdr[6]});
  st.t = hdr[2];
  for (ScalarField* f : {&st.u_s.x, &st.u_s.z, &st.u_t, &st.theta_s}) {
    for (std::size_t k = 0; k < n; ++k) {
      (*f)[k] = detail::get_f64(p);
      p += 8;
    }
  }
  return st;
}

/// Writes through a temporary file and renames it into place, so a reader
/// never sees a partially written snapshot.
inline void write_snapshot(const std::filesystem::path& path, const State& st) {
  const std::vector<unsigned char> bytes = encode_snapshot(st);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot move snapshot into place at " + path.string() + ": " + ec.message());
}

inline State read_snapshot(const std::filesystem::path& path, const std::optional<Grid>& expected = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open snapshot " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes, expected);
}

}  // namespace ism
