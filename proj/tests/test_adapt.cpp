#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "viphash/adapt.hpp"
#include "viphash/rng.hpp"

using namespace viphash;

namespace {

std::vector<Key> colliding_keys(const CoreTable& table, std::size_t n, Key start = 1) {
    std::vector<Key> keys;
    Key k = start;
    const std::uint64_t bucket = table.bucket_of(start);
    while (keys.size() < n) {
        if (table.bucket_of(k) == bucket) keys.push_back(k);
        ++k;
    }
    return keys;
}

std::vector<Key> chain_keys(const CoreTable& t, std::uint64_t bucket) {
    std::vector<Key> out;
    for (auto [k, v] : t.chain(bucket)) out.push_back(k);
    return out;
}

std::vector<std::uint32_t> chain_slots(const CoreTable& t, std::uint64_t bucket) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = t.head(bucket); s != CoreTable::npos; s = t.next(s)) out.push_back(s);
    return out;
}

// Builds a 3-key single chain [a, b, c] with injected request counts.
struct ChainFixture {
    CoreTable table;
    RequestCounters counters;
    std::vector<Key> keys;
    std::uint64_t bucket;

    // Two buckets: up to three colliding keys fit without any rehash, and
    // erases never dip below the minimum table size.
    ChainFixture(std::vector<std::uint64_t> counts)
        : table(TableConfig{.bucket_count_log2 = 1}), counters(table) {
        keys = colliding_keys(table, counts.size());
        for (auto it = keys.rbegin(); it != keys.rend(); ++it) table.insert(*it, *it);
        bucket = table.bucket_of(keys[0]);
        counters = begin_learn(table);
        auto slots = chain_slots(table, bucket);
        for (std::size_t i = 0; i < counts.size(); ++i) counters[slots[i]] = counts[i];
    }
};

}  // namespace

TEST_CASE("no swap when the fetched count stays below the prefix minimum") {
    ChainFixture f({5, 1});  // [A(5), B(1)]
    auto r = fetch_adaptive(f.table, f.counters, f.keys[1]);
    CHECK(r.found);
    CHECK(r.displacement == 2);
    CHECK(chain_keys(f.table, f.bucket) == std::vector<Key>{f.keys[0], f.keys[1]});
    auto slots = chain_slots(f.table, f.bucket);
    CHECK(f.counters.count_at(slots[0]) == 5);
    CHECK(f.counters.count_at(slots[1]) == 2);
}

TEST_CASE("swap fires once the incremented count exceeds the minimum") {
    ChainFixture f({1, 1});  // [A(1), B(1)]
    fetch_adaptive(f.table, f.counters, f.keys[1]);  // B -> 2 > 1: swap
    CHECK(chain_keys(f.table, f.bucket) == std::vector<Key>{f.keys[1], f.keys[0]});
    auto slots = chain_slots(f.table, f.bucket);
    CHECK(f.counters.count_at(slots[0]) == 2);
    CHECK(f.counters.count_at(slots[1]) == 1);
}

TEST_CASE("swap targets the earliest minimum in the walked prefix") {
    ChainFixture f({3, 0, 2});  // [A(3), B(0), C(2)]
    auto r = fetch_adaptive(f.table, f.counters, f.keys[2]);
    CHECK(r.displacement == 3);
    // C(now 3) > min-ahead B(0): C swaps into B's slot
    CHECK(chain_keys(f.table, f.bucket) ==
          std::vector<Key>{f.keys[0], f.keys[2], f.keys[1]});
    auto slots = chain_slots(f.table, f.bucket);
    CHECK(f.counters.count_at(slots[0]) == 3);
    CHECK(f.counters.count_at(slots[1]) == 3);
    CHECK(f.counters.count_at(slots[2]) == 0);
}

TEST_CASE("a head hit never swaps with itself") {
    ChainFixture f({0, 7});
    auto before = chain_keys(f.table, f.bucket);
    auto r = fetch_adaptive(f.table, f.counters, f.keys[0]);
    CHECK(r.displacement == 1);
    CHECK(chain_keys(f.table, f.bucket) == before);
}

TEST_CASE("a miss mutates nothing") {
    ChainFixture f({2, 1});
    Key absent = colliding_keys(f.table, 3).back();
    auto before_chain = chain_keys(f.table, f.bucket);
    auto slots = chain_slots(f.table, f.bucket);
    std::vector<std::uint64_t> before_counts;
    for (auto s : slots) before_counts.push_back(f.counters.count_at(s));

    auto r = fetch_adaptive(f.table, f.counters, absent);
    CHECK_FALSE(r.found);
    CHECK(r.displacement == 2);
    CHECK(chain_keys(f.table, f.bucket) == before_chain);
    for (std::size_t i = 0; i < slots.size(); ++i)
        CHECK(f.counters.count_at(slots[i]) == before_counts[i]);
}

TEST_CASE("begin_learn mirrors the table with zeroed counters") {
    CoreTable t;
    for (Key k = 1; k <= 20; ++k) t.insert(k, k);
    RequestCounters counters = begin_learn(t);
    for (std::uint64_t b = 0; b < t.bucket_count(); ++b)
        for (std::uint32_t s = t.head(b); s != CoreTable::npos; s = t.next(s))
            CHECK(counters.count_at(s) == 0);
}

TEST_CASE("learn-mode insert mirrors a zero counter, overwrite keeps it") {
    ChainFixture f({4});
    Key fresh = colliding_keys(f.table, 2).back();
    CHECK(insert_during_learn(f.table, f.counters, fresh, 9));
    auto keys = chain_keys(f.table, f.bucket);
    CHECK(keys == std::vector<Key>{fresh, f.keys[0]});
    auto slots = chain_slots(f.table, f.bucket);
    CHECK(f.counters.count_at(slots[0]) == 0);
    CHECK(f.counters.count_at(slots[1]) == 4);

    CHECK_FALSE(insert_during_learn(f.table, f.counters, f.keys[0], 123));
    CHECK(f.counters.count_at(slots[1]) == 4);
    CHECK(f.table.fetch(f.keys[0]).value == 123);
}

TEST_CASE("learn-mode erase removes the entry and its mirror slot") {
    ChainFixture f({5, 3});
    CHECK(erase_during_learn(f.table, f.counters, f.keys[0]));
    CHECK(chain_keys(f.table, f.bucket) == std::vector<Key>{f.keys[1]});
    auto slots = chain_slots(f.table, f.bucket);
    CHECK(f.counters.count_at(slots[0]) == 3);
    CHECK_FALSE(erase_during_learn(f.table, f.counters, f.keys[0]));
}

TEST_CASE("counters track entries across swaps, rehashes, and slot reuse") {
    CoreTable t(TableConfig{.bucket_count_log2 = 2});
    RequestCounters counters = begin_learn(t);
    std::map<Key, std::uint64_t> oracle;  // expected per-key counters
    Xoshiro256 rng(77);
    for (int i = 0; i < 20000; ++i) {
        Key k = 1 + rng.next_below(200);
        switch (rng.next_below(4)) {
            case 0:
            case 1: {
                auto r = fetch_adaptive(t, counters, k);
                if (r.found) ++oracle[k];
                break;
            }
            case 2:
                if (insert_during_learn(t, counters, k, k)) oracle[k] = 0;
                break;
            case 3:
                if (erase_during_learn(t, counters, k)) oracle.erase(k);
                break;
        }
    }
    CHECK(t.rehash_count() > 0);
    std::size_t seen = 0;
    for (std::uint64_t b = 0; b < t.bucket_count(); ++b) {
        for (std::uint32_t s = t.head(b); s != CoreTable::npos; s = t.next(s)) {
            ++seen;
            CHECK(counters.count_at(s) == oracle.at(t.key_at(s)));
        }
    }
    CHECK(seen == oracle.size());
}

TEST_CASE("a fetch changes at most two slots and preserves multisets") {
    CoreTable t(TableConfig{.bucket_count_log2 = 2});
    Xoshiro256 rng(5);
    for (int i = 0; i < 32; ++i) t.insert(rng.next_below(1000), i);
    RequestCounters counters = begin_learn(t);

    auto snapshot = [&] {
        std::vector<std::pair<Key, Value>> entries;
        std::vector<std::uint64_t> counts;
        for (std::uint64_t b = 0; b < t.bucket_count(); ++b)
            for (std::uint32_t s = t.head(b); s != CoreTable::npos; s = t.next(s)) {
                entries.emplace_back(t.key_at(s), t.value_at(s));
                counts.push_back(counters.count_at(s));
            }
        return std::pair(entries, counts);
    };

    for (int i = 0; i < 3000; ++i) {
        auto [entries_before, counts_before] = snapshot();
        Key k = rng.next_below(1000);
        auto r = fetch_adaptive(t, counters, k);
        auto [entries_after, counts_after] = snapshot();

        std::size_t moved = 0;
        for (std::size_t j = 0; j < entries_before.size(); ++j)
            if (entries_before[j].first != entries_after[j].first) ++moved;
        CHECK(moved <= 2);  // at most one swap

        auto se = entries_before;
        auto sa = entries_after;
        std::sort(se.begin(), se.end());
        std::sort(sa.begin(), sa.end());
        CHECK(se == sa);

        if (!r.found) {
            auto cb = counts_before;
            auto ca = counts_after;
            std::sort(cb.begin(), cb.end());
            std::sort(ca.begin(), ca.end());
            CHECK(cb == ca);
        }
    }
}

TEST_CASE("popularity-weighted fetches sort a small chain") {
    // 4 keys, strictly decreasing popularity, adversarial initial order
    CoreTable t(TableConfig{.bucket_count_log2 = 4});
    auto keys = colliding_keys(t, 4);
    for (Key k : keys) t.insert(k, k);  // chain is reverse of keys
    RequestCounters counters = begin_learn(t);
    const double probs[4] = {0.5, 0.27, 0.15, 0.08};
    Xoshiro256 rng(123);
    for (int i = 0; i < 30000; ++i) {
        double u = rng.next_double();
        int pick = u < 0.5 ? 0 : u < 0.77 ? 1 : u < 0.92 ? 2 : 3;
        (void)probs;
        fetch_adaptive(t, counters, keys[pick]);
    }
    CHECK(chain_keys(t, t.bucket_of(keys[0])) == keys);
}

TEST_CASE("relative request frequency converges to 2p - 1") {
    CoreTable t(TableConfig{.bucket_count_log2 = 4});
    auto keys = colliding_keys(t, 2);
    t.insert(keys[0], 0);
    t.insert(keys[1], 1);
    RequestCounters counters = begin_learn(t);
    Xoshiro256 rng(9);
    std::uint64_t n1 = 0, n2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        bool first = rng.next_double() < 0.7;
        fetch_adaptive(t, counters, first ? keys[0] : keys[1]);
        (first ? n1 : n2)++;
    }
    double ratio = (static_cast<double>(n1) - static_cast<double>(n2)) / n;
    CHECK(ratio == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("min-skipping swaps beat adjacent transposition to the front") {
    // Adjacent-transposition variant, used as the comparison baseline.
    auto fetch_transpose = [](CoreTable& t, RequestCounters& c, Key key) {
        const std::uint64_t bucket = t.bucket_of(key);
        std::uint32_t prev = CoreTable::npos;
        std::uint32_t idx = t.head(bucket);
        while (idx != CoreTable::npos && t.key_at(idx) != key) {
            prev = idx;
            idx = t.next(idx);
        }
        if (idx == CoreTable::npos) return;
        ++c[idx];
        if (prev != CoreTable::npos && c.count_at(idx) > c.count_at(prev)) {
            t.swap_payload(idx, prev);
            std::uint64_t tmp = c[idx];
            c[idx] = c[prev];
            c[prev] = tmp;
        }
    };

    const int trials = 1000;
    const int n_keys = 8;
    std::uint64_t total_selection = 0, total_transpose = 0;
    Xoshiro256 seed_rng(4242);
    for (int trial = 0; trial < trials; ++trial) {
        std::uint64_t seed = seed_rng.next();
        for (int variant = 0; variant < 2; ++variant) {
            CoreTable t(TableConfig{.bucket_count_log2 = 6});
            auto keys = colliding_keys(t, n_keys);
            for (Key k : keys) t.insert(k, k);  // most popular key at the back
            RequestCounters counters = begin_learn(t);
            Xoshiro256 rng(seed);
            // zipf(1)-ish popularity over the 8 keys
            double weights[n_keys];
            double total = 0;
            for (int i = 0; i < n_keys; ++i) total += weights[i] = 1.0 / (i + 1);
            std::uint64_t requests = 0;
            const std::uint64_t bucket = t.bucket_of(keys[0]);
            while (t.key_at(t.head(bucket)) != keys[0] && requests < 100000) {
                double u = rng.next_double() * total;
                int pick = 0;
                while (u > weights[pick]) u -= weights[pick++];
                if (variant == 0)
                    fetch_adaptive(t, counters, keys[pick]);
                else
                    fetch_transpose(t, counters, keys[pick]);
                ++requests;
            }
            (variant == 0 ? total_selection : total_transpose) += requests;
        }
    }
    CHECK(total_selection < total_transpose);
}

TEST_CASE("end_learn leaves the table untouched and runs the reclaim hook") {
    CoreTable t;
    for (Key k = 1; k <= 50; ++k) t.insert(k, k);
    RequestCounters counters = begin_learn(t);
    Xoshiro256 rng(8);
    for (int i = 0; i < 500; ++i) fetch_adaptive(t, counters, 1 + rng.next_below(50));

    std::vector<std::vector<Key>> chains_before;
    for (std::uint64_t b = 0; b < t.bucket_count(); ++b) chains_before.push_back(chain_keys(t, b));

    std::size_t reclaimed_bytes = 0;
    end_learn(std::move(counters),
              [&](const void*, std::size_t bytes) { reclaimed_bytes = bytes; });
    CHECK(reclaimed_bytes >= 50 * sizeof(std::uint64_t));

    for (std::uint64_t b = 0; b < t.bucket_count(); ++b) CHECK(chain_keys(t, b) == chains_before[b]);
    CHECK(t.fetch(1).found);
}
