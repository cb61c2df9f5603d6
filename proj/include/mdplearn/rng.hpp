#pragma once

#include <cassert>
#include <cstdint>

namespace mdplearn {

// Splittable counter-based pseudo random generator (splitmix64 core).
// Every consumer of randomness owns its own stream, derived from a master
// seed via split(), so results are reproducible regardless of call
// interleaving and platform (no libstdc++ distribution objects involved).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    assert(n > 0);
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Derives an independent child stream. Different keys (or successive calls
  // with the same key) give unrelated streams.
  Rng split(std::uint64_t key) {
    std::uint64_t mixed = next_u64() ^ (key * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return Rng(mixed);
  }

 private:
  std::uint64_t state_;
};

}  // namespace mdplearn
