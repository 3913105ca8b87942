#pragma once

#include <cstdint>
#include <cstring>
#include <string>

namespace ewclab {

// FNV-1a, 64-bit. Used for content hashes of blobs/files and for deriving
// stream sub-seeds from (seed, tag) pairs.
constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = kFnvOffset) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = kFnvOffset) {
    return fnv1a64(s.data(), s.size(), h);
}

inline uint64_t hash_mix_u64(uint64_t h, uint64_t v) {
    unsigned char b[8];
    std::memcpy(b, &v, 8);
    return fnv1a64(b, 8, h);
}

// Stable sub-seed derivation: independent RNG streams for shuffling, masking,
// subsampling etc. all hang off one run seed without correlation.
inline uint64_t seed_for(uint64_t base, const std::string& tag, uint64_t index = 0) {
    uint64_t h = hash_mix_u64(kFnvOffset, base);
    h = fnv1a64(tag, h);
    h = hash_mix_u64(h, index);
    return h;
}

inline std::string hash_hex(uint64_t h) {
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace ewclab
