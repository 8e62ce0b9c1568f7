#pragma once

#include <cstdint>

namespace viphash {

/// 64-bit key hash with MurmurHash3 (x64/128) mixing, specialized for an
/// 8-byte input block. Deterministic for a given (key, seed) across runs
/// and platforms; full avalanche on the key bits.
inline std::uint64_t hash_key(std::uint64_t key, std::uint64_t seed) {
    constexpr std::uint64_t c1 = 0x87c37b91114253d5ull;
    constexpr std::uint64_t c2 = 0x4cf5ad432745937full;
    auto rotl = [](std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); };
    auto fmix = [](std::uint64_t k) {
        k ^= k >> 33;
        k *= 0xff51afd7ed558ccdull;
        k ^= k >> 33;
        k *= 0xc4ceb9fe1a85ec53ull;
        k ^= k >> 33;
        return k;
    };

    std::uint64_t h1 = seed;
    std::uint64_t h2 = seed;

    // single 8-byte tail block
    std::uint64_t k1 = key;
    k1 *= c1;
    k1 = rotl(k1, 31);
    k1 *= c2;
    h1 ^= k1;

    h1 ^= 8u;
    h2 ^= 8u;
    h1 += h2;
    h2 += h1;
    h1 = fmix(h1);
    h2 = fmix(h2);
    h1 += h2;
    return h1;
}

/// Bucket index by power-of-two masking: the low `bucket_count_log2` bits.
inline std::uint64_t bucket_index(std::uint64_t hash, unsigned bucket_count_log2) {
    return hash & ((std::uint64_t{1} << bucket_count_log2) - 1);
}

}  // namespace viphash
