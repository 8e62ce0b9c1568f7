#include "viphash/adapt.hpp"

namespace viphash {

FetchResult fetch_adaptive(CoreTable& table, RequestCounters& counters, Key key) {
    const std::uint64_t bucket = table.bucket_of(key);
    std::uint32_t idx = table.head(bucket);
    if (idx == CoreTable::npos) return {false, 0, 0};

    std::uint32_t min_slot = idx;
    std::uint64_t min_count = counters.count_at(idx);
    std::uint64_t d = 0;
    while (idx != CoreTable::npos && table.key_at(idx) != key) {
        // strict <: among ties the earliest entry stays the minimum
        if (counters.count_at(idx) < min_count) {
            min_slot = idx;
            min_count = counters.count_at(idx);
        }
        ++d;
        idx = table.next(idx);
    }
    if (idx == CoreTable::npos) return {false, 0, d};
    ++d;

    const Value value = table.value_at(idx);
    const std::uint64_t count = ++counters[idx];
    // Re-read the minimum at decision time: when the key sits at the head,
    // min_slot is the fetched slot itself and no swap must happen.
    if (count > counters.count_at(min_slot)) {
        table.swap_payload(idx, min_slot);
        std::uint64_t tmp = counters[idx];
        counters[idx] = counters[min_slot];
        counters[min_slot] = tmp;
    }
    return {true, value, d};
}

bool insert_during_learn(CoreTable& table, RequestCounters& counters, Key key, Value value) {
    bool was_new = false;
    const std::uint32_t slot = table.insert_slot(key, value, was_new);
    if (was_new) counters.on_new_slot(slot);
    return was_new;
}

bool erase_during_learn(CoreTable& table, RequestCounters& counters, Key key) {
    (void)counters;  // the slot's counter is re-zeroed on reuse
    return table.erase(key);
}

void end_learn(RequestCounters&& counters, const CacheReclaimHook& reclaim) {
    if (reclaim) reclaim(counters.data(), counters.size_bytes());
    RequestCounters dropped = std::move(counters);
    (void)dropped;
}

}  // namespace viphash
