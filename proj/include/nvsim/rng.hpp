#pragma once

#include <cstdint>
#include <string>

namespace nvsim {

// Counter-based deterministic generator. Every draw is a pure function of
// (seed, stream, counter), so results do not depend on evaluation order,
// platform, or how many draws other code paths consumed. The algorithm
// identifier is recorded in output metadata.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::string algorithm_id() { return "splitmix64-counter-v1"; }

  std::uint64_t seed() const { return seed_; }

  // 64-bit hash of (seed, stream, counter)
  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    std::uint64_t x = mix(seed_ ^ mix(stream ^ 0x9e3779b97f4a7c15ull));
    return mix(x + counter);
  }

  // uniform double in [0, 1)
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p, std::uint64_t stream, std::uint64_t counter) const {
    return uniform(stream, counter) < p;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
};

// stable stream ids for the independent random decisions in the project
namespace rng_stream {
inline constexpr std::uint64_t lattice_occupancy = 1;
inline constexpr std::uint64_t surface_species = 2;
inline constexpr std::uint64_t bath_state_sample = 3;
inline constexpr std::uint64_t test_generator = 100;
}  // namespace rng_stream

}  // namespace nvsim
