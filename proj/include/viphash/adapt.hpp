#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "viphash/core_table.hpp"

namespace viphash {

/// Hook invoked with the counter buffer when learning ends, before the
/// memory is released. The default is a no-op; a platform build may flush
/// the region from cache here. Correctness never depends on it.
using CacheReclaimHook = std::function<void(const void* data, std::size_t bytes)>;

/// Per-entry request counters mirroring the table's chains one to one.
/// The mirror is indexed by slot, so it shares the table's chain structure
/// by construction and stays isomorphic across swaps and rehashes.
class RequestCounters {
public:
    /// Allocate and zero a mirror for the table's current slab.
    explicit RequestCounters(const CoreTable& table) : counts_(table.slot_count(), 0) {}

    std::uint64_t count_at(std::uint32_t slot) const { return counts_[slot]; }

    /// Zero the counter of a freshly (re)allocated slot, growing the mirror
    /// if the slab grew.
    void on_new_slot(std::uint32_t slot) {
        if (slot >= counts_.size()) counts_.resize(slot + 1, 0);
        counts_[slot] = 0;
    }

    std::uint64_t& operator[](std::uint32_t slot) { return counts_[slot]; }
    const std::uint64_t* data() const { return counts_.data(); }
    std::size_t size_bytes() const { return counts_.size() * sizeof(std::uint64_t); }

private:
    std::vector<std::uint64_t> counts_;
};

/// Begin a learn episode: build a zeroed counter mirror for the table.
inline RequestCounters begin_learn(const CoreTable& table) { return RequestCounters(table); }

/// Fetch while learning: count the request and stochastically sort the
/// chain. Walking to the key, the entry with the fewest requests seen so
/// far (earliest wins ties) is tracked; if the fetched entry's incremented
/// count exceeds that minimum, the two entries swap payloads and counters.
/// At most one swap per fetch; misses mutate nothing.
FetchResult fetch_adaptive(CoreTable& table, RequestCounters& counters, Key key);

/// Insert during a learn episode; a new entry gets a zeroed mirror counter,
/// an overwrite leaves the counter alone.
bool insert_during_learn(CoreTable& table, RequestCounters& counters, Key key, Value value);

/// Erase during a learn episode; the mirror slot dies with the entry.
bool erase_during_learn(CoreTable& table, RequestCounters& counters, Key key);

/// End the learn episode: run the reclaim hook over the counter buffer and
/// release it. The main table keeps its learned chain order.
void end_learn(RequestCounters&& counters, const CacheReclaimHook& reclaim = {});

}  // namespace viphash
