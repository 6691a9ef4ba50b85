#pragma once

#include <array>
#include <cstdint>

namespace subreg {

// splitmix64 step: advances the state and returns the next output. Used for
// seed expansion and for mixing stream tags into seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++ engine. Satisfies UniformRandomBitGenerator, so it plugs into
// the <random> distributions.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0) {
    // Seed the four state words through splitmix64, the recommended
    // initialization for the xoshiro family.
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

// Purpose tag for stream splitting. Every consumer of randomness pulls from
// its own stream so replications can run in any order (or in parallel) and
// still reproduce bit-identically.
enum class StreamPurpose : std::uint64_t {
  kCovariates = 1,  // covariate matrix draws
  kNoise = 2,       // model error draws
  kSampler = 3,     // subsample selection draws
  kSuite = 4,       // verification / test instance generation
};

// Stream-split rule: the engine seed is derived by folding
// (base_seed, purpose, replication, cell) through splitmix64, one tag per
// step. Identical tuples give identical streams; distinct tuples give
// independent streams for practical purposes.
inline Xoshiro256pp make_stream(std::uint64_t base_seed, StreamPurpose purpose,
                                std::uint64_t replication = 0,
                                std::uint64_t cell = 0) {
  std::uint64_t s = base_seed;
  std::uint64_t h = splitmix64_next(s);
  s ^= static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL;
  h ^= splitmix64_next(s);
  s ^= (replication + 1) * 0x8CB92BA72F3D8DD7ULL;
  h ^= splitmix64_next(s);
  s ^= (cell + 1) * 0xEB44ACCAB455D165ULL;
  h ^= splitmix64_next(s);
  return Xoshiro256pp(h);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Xoshiro256pp& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound). Modulo reduction; the bias is below 2^-53
// for every bound used in this library.
inline std::uint64_t uniform_below(Xoshiro256pp& rng, std::uint64_t bound) {
  return rng() % bound;
}

}  // namespace subreg
