#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace prodkit {

// FNV-1a, 64 bit. Used for fixture keys, rng namespacing and manifest
// digests; not for anything adversarial.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string fnv1a64_hex(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace prodkit
