#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gspde {

/// Philox4x32-10 counter-based block cipher (Salmon et al.).
/// A 128-bit counter and 64-bit key map to 128 pseudo-random bits;
/// distinct (key, counter) pairs give independent outputs, so streams can
/// be indexed by (seed, path, mode, step) without any sequential state.
struct Philox4x32 {
  using ctr_t = std::array<std::uint32_t, 4>;
  using key_t = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static ctr_t block(ctr_t ctr, key_t key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

/// Deterministic random stream keyed by a 64-bit seed. Every draw is
/// addressed by a 128-bit counter (a, b), so regeneration is bit-exact
/// and order-independent.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_{low32(seed), high32(seed)} {}

  /// Two independent uniforms in (0, 1] from one counter.
  std::array<double, 2> uniform_pair(std::uint64_t a, std::uint64_t b) const {
    const auto words = Philox4x32::block(
        {low32(a), high32(a), low32(b), high32(b)}, key_);
    return {to_unit(words[0], words[1]), to_unit(words[2], words[3])};
  }

  /// One standard normal per counter (Box-Muller, cosine branch).
  double normal(std::uint64_t a, std::uint64_t b) const {
    const auto u = uniform_pair(a, b);
    return std::sqrt(-2.0 * std::log(u[0])) *
           std::cos(2.0 * 3.14159265358979323846 * u[1]);
  }

 private:
  static std::uint32_t low32(std::uint64_t v) {
    return static_cast<std::uint32_t>(v);
  }
  static std::uint32_t high32(std::uint64_t v) {
    return static_cast<std::uint32_t>(v >> 32);
  }
  // 53-bit mantissa from two words, mapped to (0, 1] so log() is safe.
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits =
        ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  Philox4x32::key_t key_;
};

}  // namespace gspde
