#ifndef FDBREAK_RNG_HPP
#define FDBREAK_RNG_HPP

#include <cmath>
#include <cstdint>

namespace fdbreak {

/// Deterministic random stream keyed by (seed, tag, index). Replicate b of a
/// Monte Carlo run always sees the same draws no matter how many workers run
/// or in what order they finish, which is what makes every pipeline output
/// byte-identical across thread counts.
///
/// The generator is xoshiro256++ with splitmix64 seeding; all distributions
/// are generated by fixed explicit algorithms, never the standard library's
/// unspecified ones.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    std::uint64_t sm = seed;
    sm = splitmix(sm + 0x9e3779b97f4a7c15ULL * (tag + 1));
    sm = splitmix(sm + 0x9e3779b97f4a7c15ULL * (index + 1));
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      word = splitmix(sm);
    }
  }

  std::uint64_t next_u64() {
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

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Uniform integer on [lo, hi], inclusive.
  long uniform_int(long lo, long hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(next_u64() % range);
  }

  /// Standard normal via Box-Muller (one spare cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Unit-variance Laplace: density 2^{-1/2} exp(-sqrt(2) |x|).
  double laplace_unit() {
    const double u = uniform01() - 0.5;
    const double mag = -std::log(1.0 - 2.0 * std::abs(u));  // Exp(1)
    return std::copysign(mag / std::sqrt(2.0), u);
  }

private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Stream tags, one per consumer, so pipeline stages never share draws.
namespace stream_tag {
inline constexpr std::uint64_t test_quantiles = 0xA1;
inline constexpr std::uint64_t jump_quantiles = 0xA2;
inline constexpr std::uint64_t sim_dataset = 0xB1;
inline constexpr std::uint64_t mc_replicate = 0xB2;
}  // namespace stream_tag

/// Derives a child seed for replicate r of a study keyed by `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t r) {
  RngStream s(seed, 0xC0, r);
  return s.next_u64();
}

}  // namespace fdbreak

#endif
