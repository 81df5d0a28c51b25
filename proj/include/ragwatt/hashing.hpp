#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace ragwatt {

inline constexpr uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

/// FNV-1a over raw bytes. Used for fingerprints, trial ids and the hashing embedder.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = kFnvOffset) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

/// Uniform draw in [0, n) from raw engine output with rejection sampling.
/// std::uniform_int_distribution is implementation-defined; this is not.
inline uint64_t bounded_rand(std::mt19937_64& rng, uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

}  // namespace ragwatt
