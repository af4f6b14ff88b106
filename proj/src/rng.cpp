#include "rebar/rng.hpp"

#include "rebar/common.hpp"

namespace rebar::rng {

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  while (true) {
    std::uint64_t v = next();
    if (v < limit) return v % bound;
  }
}

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53;
constexpr std::uint32_t kM1 = 0xCD9E8D57;
constexpr std::uint32_t kW0 = 0x9E3779B9;
constexpr std::uint32_t kW1 = 0xBB67AE85;

inline void round_once(PhiloxCounter& c, const PhiloxKey& k) {
  const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
  const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    round_once(ctr, key);
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t tick, std::string_view actor_id) {
  const std::uint64_t actor = fnv1a64(actor_id);
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  // ctr[3] counts blocks within the stream; the tick keeps its low 32 bits.
  ctr_ = {static_cast<std::uint32_t>(tick), static_cast<std::uint32_t>(actor),
          static_cast<std::uint32_t>(actor >> 32), 0};
}

double CounterStream::uniform() {
  if (used_ >= 4) {
    block_ = philox4x32_10(ctr_, key_);
    ++ctr_[3];
    used_ = 0;
  }
  const std::uint64_t hi = block_[used_];
  const std::uint64_t lo = block_[used_ + 1];
  used_ += 2;
  const std::uint64_t bits = (hi << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace rebar::rng
