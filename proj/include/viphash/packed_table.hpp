#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

#include "viphash/core_table.hpp"

namespace viphash {

/// Minimal chained table with entries packed byte-for-byte in one slab and
/// a fixed bucket count. Exists solely for the counter-overhead experiment:
/// the WithCounter variant widens every entry by a 1-byte request counter
/// (16 -> 17 payload bytes) that is bumped on each successful fetch. Not
/// part of the production surface; no rehashing, no adaptivity.
template <bool WithCounter>
class PackedChainTable {
public:
    static constexpr std::uint32_t npos = 0xffffffffu;
    static constexpr std::size_t kEntryBytes = 16 + (WithCounter ? 1 : 0);
    static constexpr std::size_t kStride = kEntryBytes + 4;  // + next link

    explicit PackedChainTable(unsigned bucket_count_log2, std::uint64_t hash_seed = 0)
        : log2_(bucket_count_log2), seed_(hash_seed) {
        heads_.assign(std::uint64_t{1} << log2_, npos);
    }

    void reserve(std::size_t entries) { slab_.reserve(entries * kStride); }

    bool insert(Key key, Value value) {
        const std::uint64_t b = bucket_index(hash_key(key, seed_), log2_);
        for (std::uint32_t idx = heads_[b]; idx != npos; idx = next_of(idx)) {
            if (key_of(idx) == key) {
                store64(idx * kStride + 8, value);
                return false;
            }
        }
        const std::uint32_t idx = static_cast<std::uint32_t>(slab_.size() / kStride);
        slab_.resize(slab_.size() + kStride);
        store64(idx * kStride, key);
        store64(idx * kStride + 8, value);
        if constexpr (WithCounter) slab_[idx * kStride + 16] = 0;
        store_next(idx, heads_[b]);
        heads_[b] = idx;
        ++key_count_;
        return true;
    }

    FetchResult fetch(Key key) {
        const std::uint64_t b = bucket_index(hash_key(key, seed_), log2_);
        std::uint64_t d = 0;
        for (std::uint32_t idx = heads_[b]; idx != npos; idx = next_of(idx)) {
            ++d;
            if (key_of(idx) == key) {
                if constexpr (WithCounter) ++slab_[idx * kStride + 16];
                return {true, load64(idx * kStride + 8), d};
            }
        }
        return {false, 0, d};
    }

    std::uint64_t key_count() const { return key_count_; }
    std::uint64_t bucket_count() const { return heads_.size(); }

private:
    Key key_of(std::uint32_t idx) const { return load64(idx * kStride); }
    std::uint32_t next_of(std::uint32_t idx) const {
        std::uint32_t v;
        std::memcpy(&v, slab_.data() + idx * kStride + kEntryBytes, 4);
        return v;
    }
    void store_next(std::uint32_t idx, std::uint32_t v) {
        std::memcpy(slab_.data() + idx * kStride + kEntryBytes, &v, 4);
    }
    std::uint64_t load64(std::size_t off) const {
        std::uint64_t v;
        std::memcpy(&v, slab_.data() + off, 8);
        return v;
    }
    void store64(std::size_t off, std::uint64_t v) { std::memcpy(slab_.data() + off, &v, 8); }

    std::vector<std::uint8_t> slab_;
    std::vector<std::uint32_t> heads_;
    std::uint64_t key_count_ = 0;
    unsigned log2_;
    std::uint64_t seed_;
};

}  // namespace viphash
