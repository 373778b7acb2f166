#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace modelgate {

// SHA-256 hex digest (OpenSSL libcrypto). Used for dataset fingerprints,
// batch ids, config hashes and the audit hash chain.
std::string sha256_hex(std::string_view data);

// Small non-cryptographic mixers for deterministic, order-independent
// per-record draws (split assignment, synthetic cohorts). Stable across
// runs and platforms, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Keyed per-string draw in [0, 1). The key separates independent uses of
// the same id (split side, label, per-feature noise, ...).
double keyed_unit(std::string_view id, std::string_view salt, std::uint64_t seed);

// Standard normal deviate derived from the same keyed stream (Box-Muller).
double keyed_normal(std::string_view id, std::string_view salt, std::uint64_t seed);

} // namespace modelgate
