#pragma once

#include <cstdint>
#include <random>

namespace ddpmlab {

// splitmix64 finalizer; full-avalanche mix used for seed derivation and
// counter-based draws.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// uniform in [0,1) from 53 high bits
inline double u64_to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// uniform in (0,1]; safe as a log() argument
inline double u64_to_unit_pos(std::uint64_t u) {
    return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;
}

// Sequential RNG: mt19937_64 engine (portable across platforms) with
// hand-rolled output mappings, since the std distributions are
// implementation-defined and golden test values must not depend on the
// standard library build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform() { return u64_to_unit(next_u64()); }

    // Box-Muller (cosine branch)
    double normal() {
        double u1 = u64_to_unit_pos(next_u64());
        double u2 = u64_to_unit(next_u64());
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // unbiased integer in [0, n); Lemire's method
    std::uint64_t bounded(std::uint64_t n) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<__uint128_t>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::mt19937_64 engine_;
};

// Stateless counter-based draws: a pure function of (seed, a, b, c). Chains,
// shards and post-hoc probes key their noise off these so results do not
// depend on evaluation order, chunking or worker count.
inline std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

inline double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c) {
    double u1 = u64_to_unit_pos(counter_u64(seed, a, b, 2 * c));
    double u2 = u64_to_unit(counter_u64(seed, a, b, 2 * c + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Derived seed for shard/chain i of a parent seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return counter_u64(seed, 0x5eedULL, index, 0);
}

}  // namespace ddpmlab
