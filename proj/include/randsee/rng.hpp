#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace randsee::rng {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Every output block is a pure function of (key, counter), so any draw in
/// the program is addressable by its stream key and index: trajectories and
/// noise modes can be sampled in any order, or concurrently, and still
/// produce identical values.
using Block = std::array<std::uint32_t, 4>;

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b,
                    std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

inline Block philox4x32(Block ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::mulhilo(kMul0, ctr[0], hi0, lo0);
    detail::mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Identifies one independent random stream. Keys are derived, never
/// sequential, so there is no shared generator state anywhere.
struct StreamKey {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// splitmix64 finalizer; used for key derivation only.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline StreamKey master_key(std::uint64_t seed) {
  return {mix64(seed ^ 0x8BADF00D5EEDull), mix64(seed + 0x1234567887654321ull)};
}

/// Child stream for a tagged purpose (noise mode, bridge draws at step n, ...).
inline StreamKey derive(StreamKey k, std::uint64_t tag) {
  const std::uint64_t t = mix64(tag);
  return {mix64(k.hi ^ t), mix64(k.lo + (t | 1ull))};
}

inline StreamKey derive(StreamKey k, std::uint64_t tag_a, std::uint64_t tag_b) {
  return derive(derive(k, tag_a), tag_b);
}

inline Block block_at(StreamKey key, std::uint64_t index) {
  const Block ctr = {static_cast<std::uint32_t>(key.lo),
                     static_cast<std::uint32_t>(key.lo >> 32),
                     static_cast<std::uint32_t>(index),
                     static_cast<std::uint32_t>(index >> 32)};
  return philox4x32(ctr, {static_cast<std::uint32_t>(key.hi),
                          static_cast<std::uint32_t>(key.hi >> 32)});
}

namespace detail {

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(hi) << 32 | lo;
}

}  // namespace detail

/// Uniform draw in [0, 1) with 53-bit resolution. Exactly 0 is possible
/// (probability 2^-53); exactly 1 is not.
inline double uniform01(StreamKey key, std::uint64_t index) {
  const Block b = block_at(key, index);
  return static_cast<double>(detail::join(b[0], b[1]) >> 11) * 0x1.0p-53;
}

/// Pair of independent standard normals (Box-Muller on one Philox block).
inline std::array<double, 2> normal_pair(StreamKey key, std::uint64_t index) {
  const Block b = block_at(key, index);
  // u1 in (0, 1] so the log is finite; u2 in [0, 1).
  const double u1 =
      static_cast<double>((detail::join(b[0], b[1]) >> 11) + 1) * 0x1.0p-53;
  const double u2 =
      static_cast<double>(detail::join(b[2], b[3]) >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * 3.14159265358979323846 * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline double normal(StreamKey key, std::uint64_t index) {
  return normal_pair(key, index)[0];
}

}  // namespace randsee::rng
