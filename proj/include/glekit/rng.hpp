#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace glekit {

// Philox4x32-10 counter-based generator. A 128-bit counter and a 64-bit key
// map to four 32-bit words through ten bijective rounds. Being stateless, it
// hands every (stream, step, channel) tuple its own reproducible randomness,
// which is what keeps multi-particle simulations byte-identical for a given
// master seed regardless of evaluation order.
namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::uint64_t key,
                                          std::array<std::uint32_t, 4> ctr) {
  auto k0 = static_cast<std::uint32_t>(key);
  auto k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
           static_cast<std::uint32_t>(p0)};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

// SplitMix64 finalizer, used to spread seeds and stream ids over the key
// space so that nearby (seed, stream) pairs land on unrelated keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t master_seed,
                                std::uint64_t stream_id) {
  return mix64(master_seed ^ mix64(stream_id + 1));
}

inline double to_unit_interval(std::uint64_t bits) {
  // 52 random bits centred inside each cell so the result stays strictly
  // inside (0, 1); a 53-bit offset of 0.5 can round up to the cell boundary
  // and return exactly 1.0 for the top input.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace philox

struct NormalPair {
  double first;
  double second;
};

// Two standard normal draws for a (key, step, channel, purpose) tuple via
// Box-Muller on one Philox block.
inline NormalPair normal_pair(std::uint64_t key, std::uint32_t step,
                              std::uint32_t channel, std::uint32_t purpose) {
  const auto words = philox::block(key, {step, channel, purpose, 0u});
  const std::uint64_t lo =
      words[0] | (static_cast<std::uint64_t>(words[1]) << 32);
  const std::uint64_t hi =
      words[2] | (static_cast<std::uint64_t>(words[3]) << 32);
  const double u1 = philox::to_unit_interval(lo);
  const double u2 = philox::to_unit_interval(hi);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

// Sequential deterministic generator for places that just need a seeded
// stream (optimizer restarts, multi-start perturbations, test fixtures).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(philox::stream_key(seed, stream)) {}

  std::uint64_t next_u64() {
    const auto w = philox::block(
        key_, {static_cast<std::uint32_t>(counter_),
               static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u});
    ++counter_;
    return w[0] | (static_cast<std::uint64_t>(w[1]) << 32);
  }

  double uniform() { return philox::to_unit_interval(next_u64()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace glekit
