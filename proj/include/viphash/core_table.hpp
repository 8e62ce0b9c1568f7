#pragma once

#include <cstdint>
#include <vector>

#include "viphash/hash.hpp"

namespace viphash {

using Key = std::uint64_t;
using Value = std::uint64_t;

struct TableConfig {
    /// log2 of the initial bucket count; the table never shrinks below 2
    /// buckets. Growing from the 2-bucket floor keeps the load factor inside
    /// [load_factor_min, load_factor_max] after every operation; a table
    /// preset to a larger size (as the benchmarks do) sits below the band
    /// until populated, since shrinking is only ever triggered by an erase.
    unsigned bucket_count_log2 = 1;
    double load_factor_min = 0.5;
    double load_factor_max = 1.5;
    std::uint64_t hash_seed = 0;
};

struct FetchResult {
    bool found = false;
    Value value = 0;
    /// Entries examined, 1-based. On a miss this is the full chain length
    /// (0 for an empty bucket).
    std::uint64_t displacement = 0;
};

/// Smallest bucket count (as log2) whose 1.5 load-factor cap admits
/// `key_count` keys; the size a growing table settles at after a preload.
inline unsigned pick_natural_log2(std::uint64_t key_count) {
    unsigned b = 1;
    while (3 * (std::uint64_t{1} << (b - 1)) < key_count) ++b;
    return b;
}

/// Chained hash table over 8-byte integer keys and values.
///
/// New keys are linked at the front of their bucket chain; duplicate inserts
/// overwrite the value in place without moving the entry. The load factor is
/// kept in [load_factor_min, load_factor_max] by doubling on insert and
/// halving on erase (down to the 2-bucket floor). Rehashing is stable: two
/// keys sharing a bucket before and after a rehash keep their relative order.
///
/// Entries live in a slab; chains are 32-bit slot links. Slot indices are
/// stable across rehashes, which the adaptive layer relies on for its
/// request-counter mirror.
class CoreTable {
public:
    static constexpr std::uint32_t npos = 0xffffffffu;

    struct Node {
        Key key;
        Value value;
        std::uint32_t next;
    };

    explicit CoreTable(const TableConfig& config = {});

    /// Returns true if the key was newly inserted, false on value overwrite.
    bool insert(Key key, Value value) {
        bool was_new = false;
        insert_slot(key, value, was_new);
        return was_new;
    }

    /// Insert returning the slot index holding the key (for counter mirrors).
    std::uint32_t insert_slot(Key key, Value value, bool& was_new);

    bool erase(Key key);

    FetchResult fetch(Key key) const {
        std::uint32_t idx = heads_[bucket_index(hash_key(key, seed_), log2_)];
        std::uint64_t d = 0;
        while (idx != npos) {
            ++d;
            const Node& n = nodes_[idx];
            if (n.key == key) return {true, n.value, d};
            idx = n.next;
        }
        return {false, 0, d};
    }

    std::uint64_t key_count() const { return key_count_; }
    unsigned bucket_count_log2() const { return log2_; }
    std::uint64_t bucket_count() const { return std::uint64_t{1} << log2_; }
    double load_factor() const {
        return static_cast<double>(key_count_) / static_cast<double>(bucket_count());
    }
    std::uint64_t hash_seed() const { return seed_; }
    /// Number of grow/shrink events so far; lets callers detect rehashes.
    std::uint64_t rehash_count() const { return rehash_count_; }

    std::uint64_t bucket_of(Key key) const {
        return bucket_index(hash_key(key, seed_), log2_);
    }

    // Chain introspection. Slots are stable identifiers for entries.
    std::uint32_t head(std::uint64_t bucket) const { return heads_[bucket]; }
    std::uint32_t next(std::uint32_t slot) const { return nodes_[slot].next; }
    Key key_at(std::uint32_t slot) const { return nodes_[slot].key; }
    Value value_at(std::uint32_t slot) const { return nodes_[slot].value; }
    /// Slab size including free slots; counter mirrors size to this.
    std::size_t slot_count() const { return nodes_.size(); }

    /// Exchange the payloads of two slots, leaving chain links untouched.
    void swap_payload(std::uint32_t a, std::uint32_t b) {
        Node& na = nodes_[a];
        Node& nb = nodes_[b];
        std::uint64_t k = na.key, v = na.value;
        na.key = nb.key;
        na.value = nb.value;
        nb.key = k;
        nb.value = v;
    }

    /// Chain of a bucket front to back, as (key, value) pairs. Test helper.
    std::vector<std::pair<Key, Value>> chain(std::uint64_t bucket) const;

private:
    void rehash_to(unsigned new_log2);
    std::uint32_t alloc_node();

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> heads_;
    std::uint32_t free_head_ = npos;
    std::uint64_t key_count_ = 0;
    std::uint64_t rehash_count_ = 0;
    unsigned log2_;
    std::uint64_t seed_;
    double lf_min_;
    double lf_max_;
};

}  // namespace viphash
