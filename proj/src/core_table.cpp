#include "viphash/core_table.hpp"

#include <cassert>
#include <stdexcept>

namespace viphash {

CoreTable::CoreTable(const TableConfig& config)
    : log2_(config.bucket_count_log2 < 1 ? 1 : config.bucket_count_log2),
      seed_(config.hash_seed),
      lf_min_(config.load_factor_min),
      lf_max_(config.load_factor_max) {
    if (lf_min_ <= 0.0 || lf_max_ <= lf_min_)
        throw std::invalid_argument("invalid load factor bounds");
    heads_.assign(bucket_count(), npos);
}

std::uint32_t CoreTable::alloc_node() {
    if (free_head_ != npos) {
        std::uint32_t idx = free_head_;
        free_head_ = nodes_[idx].next;
        return idx;
    }
    if (nodes_.size() >= npos)
        throw std::length_error("table slab full");
    nodes_.push_back({});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
}

std::uint32_t CoreTable::insert_slot(Key key, Value value, bool& was_new) {
    std::uint32_t idx = heads_[bucket_of(key)];
    while (idx != npos) {
        Node& n = nodes_[idx];
        if (n.key == key) {
            n.value = value;  // overwrite in place, chain position kept
            was_new = false;
            return idx;
        }
        idx = n.next;
    }

    if (static_cast<double>(key_count_ + 1) > lf_max_ * static_cast<double>(bucket_count()))
        rehash_to(log2_ + 1);

    std::uint64_t bucket = bucket_of(key);
    std::uint32_t slot = alloc_node();
    nodes_[slot] = {key, value, heads_[bucket]};
    heads_[bucket] = slot;
    ++key_count_;
    was_new = true;
    return slot;
}

bool CoreTable::erase(Key key) {
    std::uint64_t bucket = bucket_of(key);
    std::uint32_t idx = heads_[bucket];
    std::uint32_t prev = npos;
    while (idx != npos) {
        if (nodes_[idx].key == key) {
            if (prev == npos)
                heads_[bucket] = nodes_[idx].next;
            else
                nodes_[prev].next = nodes_[idx].next;
            nodes_[idx].next = free_head_;
            free_head_ = idx;
            --key_count_;
            if (log2_ > 1 &&
                static_cast<double>(key_count_) < lf_min_ * static_cast<double>(bucket_count()))
                rehash_to(log2_ - 1);
            return true;
        }
        prev = idx;
        idx = nodes_[idx].next;
    }
    return false;
}

void CoreTable::rehash_to(unsigned new_log2) {
    assert(new_log2 >= 1);
    std::uint64_t new_count = std::uint64_t{1} << new_log2;
    std::vector<std::uint32_t> new_heads(new_count, npos);
    std::vector<std::uint32_t> tails(new_count, npos);

    // Old buckets in ascending order, chains front to back, appended at the
    // tail of the destination chain: relative order of cohabitants survives.
    for (std::uint64_t b = 0; b < bucket_count(); ++b) {
        std::uint32_t idx = heads_[b];
        while (idx != npos) {
            std::uint32_t following = nodes_[idx].next;
            std::uint64_t nb = bucket_index(hash_key(nodes_[idx].key, seed_), new_log2);
            nodes_[idx].next = npos;
            if (tails[nb] == npos)
                new_heads[nb] = idx;
            else
                nodes_[tails[nb]].next = idx;
            tails[nb] = idx;
            idx = following;
        }
    }

    heads_ = std::move(new_heads);
    log2_ = new_log2;
    ++rehash_count_;
}

std::vector<std::pair<Key, Value>> CoreTable::chain(std::uint64_t bucket) const {
    std::vector<std::pair<Key, Value>> out;
    for (std::uint32_t idx = heads_[bucket]; idx != npos; idx = nodes_[idx].next)
        out.emplace_back(nodes_[idx].key, nodes_[idx].value);
    return out;
}

}  // namespace viphash
