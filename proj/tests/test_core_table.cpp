#include <doctest.h>

#include <map>
#include <unordered_map>
#include <vector>

#include "viphash/core_table.hpp"
#include "viphash/rng.hpp"

using namespace viphash;

namespace {

// n keys that all land in the same bucket of the given table.
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

}  // namespace

TEST_CASE("insert links new keys at the chain front") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 4;
    CoreTable t(cfg);
    auto keys = colliding_keys(t, 3);
    const std::uint64_t bucket = t.bucket_of(keys[0]);

    CHECK(t.insert(keys[0], 10));
    CHECK(chain_keys(t, bucket) == std::vector<Key>{keys[0]});

    CHECK(t.insert(keys[1], 11));
    CHECK(t.insert(keys[2], 12));
    CHECK(chain_keys(t, bucket) == std::vector<Key>{keys[2], keys[1], keys[0]});
}

TEST_CASE("duplicate insert overwrites in place") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 4;
    CoreTable t(cfg);
    auto keys = colliding_keys(t, 3);
    for (std::size_t i = 0; i < 3; ++i) t.insert(keys[i], i);
    const std::uint64_t bucket = t.bucket_of(keys[0]);
    auto before = chain_keys(t, bucket);

    CHECK_FALSE(t.insert(keys[0], 777));
    CHECK(chain_keys(t, bucket) == before);
    auto f = t.fetch(keys[0]);
    CHECK(f.found);
    CHECK(f.value == 777);
    CHECK(t.key_count() == 3);
}

TEST_CASE("fetch displacement counts entries examined") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 4;
    CoreTable t(cfg);
    auto keys = colliding_keys(t, 3);
    // insert K3, K2, K1 -> chain [K1, K2, K3]
    t.insert(keys[2], 3);
    t.insert(keys[1], 2);
    t.insert(keys[0], 1);

    CHECK(t.fetch(keys[0]).displacement == 1);
    CHECK(t.fetch(keys[1]).displacement == 2);
    CHECK(t.fetch(keys[2]).displacement == 3);

    // miss walks the whole chain
    Key absent = colliding_keys(t, 4).back();
    auto miss = t.fetch(absent);
    CHECK_FALSE(miss.found);
    CHECK(miss.displacement == 3);

    // empty bucket
    CoreTable empty(cfg);
    auto none = empty.fetch(12345);
    CHECK_FALSE(none.found);
    CHECK(none.displacement == 0);
}

TEST_CASE("front insertion gives displacement 1 immediately") {
    CoreTable t;
    Xoshiro256 rng(3);
    for (int i = 0; i < 2000; ++i) {
        Key k = rng.next();
        if (t.insert(k, k)) CHECK(t.fetch(k).displacement == 1);
    }
}

TEST_CASE("erase splices the chain and preserves survivor order") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 1;  // erases stay above the shrink threshold
    CoreTable t(cfg);
    auto keys = colliding_keys(t, 3);
    t.insert(keys[2], 2);
    t.insert(keys[1], 1);
    t.insert(keys[0], 0);  // chain [k0, k1, k2]
    const std::uint64_t bucket = t.bucket_of(keys[0]);

    CHECK(t.erase(keys[1]));
    CHECK(chain_keys(t, bucket) == std::vector<Key>{keys[0], keys[2]});
    CHECK_FALSE(t.erase(keys[1]));
    CHECK(t.key_count() == 2);
}

TEST_CASE("grow doubles at the load-factor cap") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 10;
    CoreTable t(cfg);
    const std::uint64_t cap = 3 * (std::uint64_t{1} << 9);  // 1.5 * 1024
    for (std::uint64_t k = 1; k <= cap; ++k) t.insert(k, k);
    CHECK(t.bucket_count() == 1024);
    t.insert(cap + 1, 0);
    CHECK(t.bucket_count() == 2048);
    CHECK(t.load_factor() == doctest::Approx(0.75).epsilon(0.01));
    CHECK(t.rehash_count() == 1);
}

TEST_CASE("shrink halves below the floor load factor") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 10;
    CoreTable t(cfg);
    for (std::uint64_t k = 1; k <= 512; ++k) t.insert(k, k);
    CHECK(t.bucket_count() == 1024);
    t.erase(512);  // 511 < 0.5 * 1024
    CHECK(t.bucket_count() == 512);
    CHECK(t.load_factor() == doctest::Approx(511.0 / 512.0));
}

TEST_CASE("table never shrinks below two buckets") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 1;
    CoreTable t(cfg);
    t.insert(1, 1);
    t.insert(2, 2);
    t.erase(1);
    t.erase(2);
    CHECK(t.bucket_count() == 2);
    CHECK(t.key_count() == 0);
}

TEST_CASE("rehash keeps cohabitant order (stable split)") {
    TableConfig cfg;
    cfg.bucket_count_log2 = 4;
    CoreTable t(cfg);
    Xoshiro256 rng(17);
    std::vector<Key> keys;
    for (int i = 0; i < 24; ++i) {
        Key k = rng.next();
        if (t.insert(k, k)) keys.push_back(k);
    }
    // record pairwise order of keys sharing a bucket
    auto order_pairs = [&](const CoreTable& table) {
        std::map<std::pair<Key, Key>, bool> before;
        for (std::uint64_t b = 0; b < table.bucket_count(); ++b) {
            auto ch = chain_keys(table, b);
            for (std::size_t i = 0; i < ch.size(); ++i)
                for (std::size_t j = i + 1; j < ch.size(); ++j)
                    before[{ch[i], ch[j]}] = true;
        }
        return before;
    };
    auto before = order_pairs(t);
    while (t.rehash_count() == 0) {
        Key k = rng.next();
        t.insert(k, k);
    }
    auto after = order_pairs(t);
    // any pair sharing a bucket both before and after must keep its order
    for (const auto& [pair, _] : before) {
        auto [a, b] = pair;
        if (t.bucket_of(a) == t.bucket_of(b)) {
            CHECK(after.count({a, b}) == 1);
            CHECK(after.count({b, a}) == 0);
        }
    }
}

TEST_CASE("matches a reference map over random operation sequences") {
    Xoshiro256 seed_rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        Xoshiro256 rng(seed_rng.next());
        CoreTable t;
        std::unordered_map<Key, Value> oracle;
        for (int i = 0; i < 2000; ++i) {
            Key k = rng.next_below(300);  // small domain forces collisions
            switch (rng.next_below(3)) {
                case 0: {
                    Value v = rng.next();
                    CHECK(t.insert(k, v) == (oracle.count(k) == 0));
                    oracle[k] = v;
                    break;
                }
                case 1: {
                    auto f = t.fetch(k);
                    auto it = oracle.find(k);
                    CHECK(f.found == (it != oracle.end()));
                    if (f.found) CHECK(f.value == it->second);
                    break;
                }
                case 2:
                    CHECK(t.erase(k) == (oracle.erase(k) == 1));
                    break;
            }
            CHECK(t.key_count() == oracle.size());
            // load factor stays in band except at the 2-bucket floor
            CHECK(t.load_factor() <= 1.5);
            if (t.bucket_count_log2() > 1) CHECK(t.load_factor() >= 0.5);
        }
    }
}

TEST_CASE("hash determinism across table instances with equal seeds") {
    TableConfig cfg;
    cfg.hash_seed = 42;
    CoreTable a(cfg), b(cfg);
    Xoshiro256 rng(5);
    for (int i = 0; i < 100; ++i) {
        Key k = rng.next();
        CHECK(a.bucket_of(k) == b.bucket_of(k));
    }
}
