#pragma once

#include <cstdint>

namespace gerw {

// splitmix64 (Steele/Lea/Flood mix): one 64-bit state word, used to expand
// seeds and to derive per-trajectory streams.
struct SplitMix64 {
    std::uint64_t x;

    explicit SplitMix64(std::uint64_t seed) : x(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ (Blackman/Vigna).  State expanded from a 64-bit seed through
// splitmix64, as its authors recommend; the all-zero state cannot arise.
struct Xoshiro256pp {
    std::uint64_t s[4];

    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : s) {
            word = sm.next();
        }
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t next() {
        std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // Uniform double in [0,1): top 53 bits scaled by 2^-53.
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
};

// Stream seed for trajectory `index` under `master`.  The multiply by an odd
// constant and the splitmix64 round are both bijections of the 64-bit word,
// so distinct indices always get distinct seeds; results are independent of
// which thread runs which trajectory.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 sm(master ^ (0xA0761D6478BD642Full * (index + 1)));
    return sm.next();
}

}  // namespace gerw
