#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tsforge {

// Deterministic random stream with order-independent substream derivation.
// Substreams are derived from the stored seed, not from engine state, so how
// much a parent stream has been consumed never shifts its children. That is
// what keeps per-variable and per-anomaly draws stable when the surrounding
// code evolves.
//
// All samplers are implemented locally: the std:: distributions are
// implementation-defined, which would break byte-identical outputs across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng substream(std::uint64_t id) const {
    return Rng(mix(seed_ ^ mix(id ^ 0x5bf03635dee39a1dULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi], both ends inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    assert(lo <= hi);
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1u;
    if (range == 0) return static_cast<std::int64_t>(engine_());  // full range
    return lo + static_cast<std::int64_t>(engine_() % range);
  }

  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    assert(n > 0);
    return static_cast<std::size_t>(engine_() % n);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller transform; consumes two uniform draws per sample.
  double normal(double mean, double stddev) {
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return mean + stddev * r * std::cos(kTwoPi * u2);
  }

 private:
  // splitmix64 finalizer; decorrelates nearby seeds and substream ids.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Fisher-Yates with our own draws (std::shuffle is implementation-defined).
template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.index(i)]);
  }
}

}  // namespace tsforge
