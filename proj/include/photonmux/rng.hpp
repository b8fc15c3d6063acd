#pragma once

// Counter-based random numbers (Philox4x32-10). A stream is addressed by
// (seed, pulse index, stream id), so any pulse can be regenerated on any
// thread without touching shared state, and the same source sees the same
// numbers whether it runs alone or inside a multiplexed network.

#include <array>
#include <cmath>
#include <cstdint>

namespace photonmux {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Sequential draws from one (seed, index, stream) address.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t index, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0u} {}

  std::uint64_t next_u64() {
    if (used_ == 2) refill();
    const std::uint64_t v = (static_cast<std::uint64_t>(block_[2 * used_]) << 32) | block_[2 * used_ + 1];
    ++used_;
    return v;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); safe to take the logarithm of.
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Number of successes in n independent trials.
  int binomial(int n, double p) {
    if (p <= 0.0) return 0;
    int k = 0;
    for (int t = 0; t < n; ++t) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  /// Thermal (Bose-Einstein) count with ratio q = μ/(1+μ): P(n) = (1−q) qⁿ.
  int geometric(double q) {
    if (q <= 0.0) return 0;
    return static_cast<int>(std::floor(std::log(uniform_open()) / std::log(q)));
  }

 private:
  void refill() {
    block_ = Philox4x32::generate(ctr_, key_);
    ++ctr_[3];
    used_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int used_ = 2;
};

/// Stream ids. Sources use their index; everything else sits above them.
inline constexpr std::uint32_t kSwitchStream = 0x80000000u;
inline constexpr std::uint32_t kDiagnosticStream = 0x80000001u;

}  // namespace photonmux
