#pragma once

#include <cstdint>

namespace tmc {

inline constexpr std::uint64_t kSplitmixGamma = 0x9e3779b97f4a7c15ull;

/// One splitmix64 step: advances `state` by the golden gamma and returns the
/// mixed output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += kSplitmixGamma);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// xoshiro256++ seeded through a splitmix64 chain.
///
/// Stream k takes outputs 4k .. 4k+3 of the splitmix chain started at `seed`
/// (the jump to position 4k is the constant-time state offset 4k * gamma), so
/// distinct stream indices draw their state words from disjoint windows of a
/// single splitmix sequence.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed, std::uint64_t stream_index = 0) {
    std::uint64_t chain = seed + 4 * stream_index * kSplitmixGamma;
    for (auto& word : state_) word = splitmix64_next(chain);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0)
      state_[0] = kSplitmixGamma;  // all-zero state is a fixed point
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform draw strictly inside (0,1): (k + 1/2) * 2^-52 with k the top 52
  /// bits, so 0 and 1 are never produced and every value is an exact double.
  double next_unit() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace tmc
