#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace gfstop {

/// Counter-based random stream: output i of stream (seed, stream_id) is a
/// pure function of (seed, stream_id, i), so replications and rounds can be
/// replayed independently of each other. Mixing is two rounds of the
/// splitmix64 finalizer over the keyed counter.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(mix(seed ^ mix(stream_id + 0x9e3779b97f4a7c15ull))), counter_(0) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9e3779b97f4a7c15ull;
    return mix(mix(z));
  }

  /// Uniform on (0, 1); never returns 0 or 1.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Pair of independent standard normals (Box-Muller).
  std::pair<double, double> next_normal_pair() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559006 * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  double next_normal() { return next_normal_pair().first; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace gfstop
