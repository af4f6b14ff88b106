#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rebar::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Seed of realization `index` in a campaign: the (index+1)-th output of a
/// splitmix64 generator whose state starts at `campaign_seed`, i.e.
///   z = campaign_seed + (index + 1) * 0x9E3779B97F4A7C15  (mod 2^64)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   seed = z ^ (z >> 31)
constexpr std::uint64_t realization_seed(std::uint64_t campaign_seed, std::uint64_t index) {
  return mix64(campaign_seed + (index + 1) * kGolden);
}

/// Sequential splitmix64 generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return mix64(state_ += kGolden); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), unbiased by rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// A reproducible stream addressed by (seed, tick, actor). Each stream is
/// independent of every other address, so adding actors or ticks never
/// perturbs existing draws.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t tick, std::string_view actor_id);

  double uniform();

 private:
  PhiloxKey key_;
  PhiloxCounter ctr_;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace rebar::rng
