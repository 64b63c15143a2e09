#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace entrate {

// splitmix64 step; used for seed expansion and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes an ordered tuple of 64-bit words into a single substream seed.
// Used everywhere a (master seed, index...) pair must yield an independent
// stream: parallel trials stay reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = master ^ 0x6a09e667f3bcc908ULL;
    (void)splitmix64(s);
    for (std::uint64_t w : path) {
        s ^= w + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
        (void)splitmix64(s);
    }
    return splitmix64(s);
}

// xoshiro256++ with splitmix64 seeding. Self-contained so that sampled
// doubles are identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
        return Rng(derive_seed(master, path));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound); bound must be ≥ 1. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    double normal() {
        // Marsaglia polar method; spare value intentionally discarded for
        // stream simplicity (consumption count stays data-independent per call pair).
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double q = u * u + v * v;
            if (q > 0.0 && q < 1.0) {
                return u * std::sqrt(-2.0 * std::log(q) / q);
            }
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

} // namespace entrate
