#include "modelgate/hashing.hpp"

#include <cmath>
#include <numbers>

#include <openssl/evp.h>

#include "modelgate/errors.hpp"

namespace modelgate {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        raise(ErrorKind::IntegrityError, "SHA-256 digest computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out(len * 2, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = hex[digest[i] >> 4];
        out[2 * i + 1] = hex[digest[i] & 0xF];
    }
    return out;
}

namespace {

std::uint64_t keyed_state(std::string_view id, std::string_view salt, std::uint64_t seed) {
    std::uint64_t h = fnv1a64(id);
    h = splitmix64(h ^ fnv1a64(salt));
    return splitmix64(h ^ seed);
}

double unit_from_bits(std::uint64_t bits) {
    // 53 mantissa bits, uniform in [0, 1).
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

double keyed_unit(std::string_view id, std::string_view salt, std::uint64_t seed) {
    return unit_from_bits(keyed_state(id, salt, seed));
}

double keyed_normal(std::string_view id, std::string_view salt, std::uint64_t seed) {
    std::uint64_t s = keyed_state(id, salt, seed);
    double u1 = unit_from_bits(s);
    double u2 = unit_from_bits(splitmix64(s));
    if (u1 <= 0.0) u1 = 0x1.0p-53; // guard log(0)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace modelgate
