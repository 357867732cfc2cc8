#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sgru {

// Seedable deterministic random source.
//
// The engine is std::mt19937_64, whose integer stream is pinned by the
// standard, and all floating-point draws are derived from it with fixed
// arithmetic (no std::*_distribution, whose mappings are
// implementation-defined). Same seed, same sequence, on every platform.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; second value of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1], keeps the log finite
        double u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // Uniform integer in [0, n). Modulo mapping; bias is irrelevant at the
    // scales used here and the mapping stays platform-stable.
    std::uint64_t next_below(std::uint64_t n) { return gen_() % n; }

    // Deterministic sub-seed for a named stream (splitmix64 finalizer).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
        std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBULL;
        x ^= x >> 31;
        return x;
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a over a string; platform-stable label hashing for seed derivation.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x00000100000001B3ULL;
    }
    return h;
}

} // namespace sgru
