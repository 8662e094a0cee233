#pragma once

#include <cstdint>

namespace hetmg {

/// SplitMix64 (Steele, Lea & Flood). Child streams are derived by hashing a
/// key into the parent seed, so a stream for agent (g, i) does not depend on
/// how many other agents exist.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  SplitMix64 split(std::uint64_t key) const noexcept {
    return SplitMix64(mix(state_ ^ mix(key + 0x632be59bd9b4e019ULL)));
  }

  bool operator==(const SplitMix64&) const = default;

private:
  std::uint64_t state_;
};

}  // namespace hetmg
