#pragma once

#include <array>
#include <cstdint>

namespace polymer {

// Philox4x32 with 10 rounds (Salmon et al. 2011). Counter-based: the output
// is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Counter round(Counter c, Key k) {
    const std::uint64_t p0 = std::uint64_t(kM0) * c[0];
    const std::uint64_t p1 = std::uint64_t(kM1) * c[2];
    return {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
            std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
  }

  static constexpr Counter generate(Counter c, Key k) {
    for (int i = 0; i < 10; ++i) {
      if (i > 0) {
        k[0] += kW0;
        k[1] += kW1;
      }
      c = round(c, k);
    }
    return c;
  }
};

// Key for a 64-bit seed; `fold` (the fourth spatial coordinate in d = 4) is
// mixed into the high word.
constexpr Philox4x32::Key philox_key(std::uint64_t seed, std::uint32_t fold = 0) {
  return {std::uint32_t(seed), std::uint32_t(seed >> 32) ^ (fold * 0x85EBCA6Bu)};
}

// 64 bits drawn for one lattice cell.
constexpr std::uint64_t philox_word(Philox4x32::Counter c, Philox4x32::Key k) {
  const auto r = Philox4x32::generate(c, k);
  return (std::uint64_t(r[0]) << 32) | r[1];
}

// Uniform in (0, 1) from the top 52 bits; never 0 or 1 (the midpoint of
// the top 53-bit cell would round up to 1).
inline double word_to_open_unit(std::uint64_t w) {
  return (double(w >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace polymer
