// Seeded, platform-independent randomness.
//
// The engine is the 64-bit Mersenne Twister (mt19937_64), whose output
// stream is fully specified by the C++ standard, so identical seeds give
// identical streams on every platform. All real-valued draws are derived
// here from raw engine words (the standard library distributions are
// implementation-defined and would break cross-platform determinism).
//
// Parallel work never shares an Rng. Independent streams are derived by
// seed-splitting: child_seed = derive_seed(parent_seed, index), a
// splitmix64-based hash of (parent_seed, index).
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dc {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; two engine words per draw, no caching,
    // so the consumed stream is easy to reason about.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform integer in [0, n); n must be positive.
    std::uint64_t bounded(std::uint64_t n);

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

// splitmix64 finalizer; also usable as a general 64-bit mix.
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for parallel stream `index` under `parent` (documented
// derivation: splitmix64 applied to parent xor a mixed index).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace dc
