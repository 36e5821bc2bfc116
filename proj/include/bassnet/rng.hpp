#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace bassnet {

/// SplitMix64 finalizer. Used to derive independent keys from (seed, index).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Key for stream `index` of a family rooted at `base_seed`.
constexpr std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return mix64(mix64(base_seed) ^ mix64(index + 0x632be59bd9b4e019ull));
}

/// Philox4x32-10 counter-based generator.
///
/// The output is a pure function of (key, stream, position), so any stream can
/// be reproduced without replaying the others. Satisfies
/// UniformRandomBitGenerator with 64-bit results.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (used_ == 2) {
      refill();
    }
    const auto lo = static_cast<std::uint64_t>(block_[2 * used_]);
    const auto hi = static_cast<std::uint64_t>(block_[2 * used_ + 1]);
    ++used_;
    return (hi << 32) | lo;
  }

  /// Raw block for counter `ctr` under this generator's key.
  std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr) const noexcept {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  void refill() noexcept {
    block_ = block({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)});
    ++counter_;
    used_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 2;
};

/// Uniform double in [0, 1) with 53 random bits.
template <typename Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exponential variate with the given rate (> 0).
template <typename Rng>
double exponential(Rng& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

__extension__ using uint128 = unsigned __int128;

/// Unbiased integer in [0, n), n > 0 (Lemire's multiply-and-reject).
template <typename Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  uint128 m = static_cast<uint128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<uint128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace bassnet
