#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "viphash/core_table.hpp"

namespace viphash {

/// A probe key missed the build side, violating the FK-containment
/// assumption of the join.
struct JoinIntegrityError : std::runtime_error {
    JoinIntegrityError() : std::runtime_error("probe key absent from build relation") {}
};

struct Relation {
    enum class Role : std::uint8_t { PrimaryKey, ForeignKey };
    std::vector<std::pair<Key, Value>> tuples;
    Role role = Role::PrimaryKey;
};

struct JoinConfig {
    std::uint64_t pk_cardinality = 100000;  // |R|
    std::uint64_t fk_to_pk_ratio = 16;      // |S| / |R|
    double zipf = 0.0;                      // skew of the FK attribute
    double load_factor_target = 1.4;        // build-table sizing hint
    std::uint64_t random_seed = 0;
};

enum class JoinEngine : std::uint8_t { Default = 0, Vip = 1 };

struct JoinReport {
    JoinEngine engine = JoinEngine::Default;
    std::uint64_t output_cardinality = 0;
    std::uint64_t total_displacement = 0;
    double avg_displacement = 0.0;
    std::uint64_t learn_probes = 0;  // leading probes run in learn+adapt
    std::uint64_t build_ns = 0;
    std::uint64_t probe_ns = 0;  // includes learn_ns
    std::uint64_t learn_ns = 0;
    unsigned bucket_count_log2 = 0;
    double build_load_factor = 0.0;
};

struct JoinComparison {
    std::vector<JoinReport> default_runs;
    std::vector<JoinReport> vip_runs;
    double median_default_avg_displacement = 0.0;
    double median_vip_avg_displacement = 0.0;
    std::uint64_t median_default_probe_ns = 0;
    std::uint64_t median_vip_probe_ns = 0;
};

/// R gets sequential keys 1..|R|; S draws its keys Zipf(s) over R's keys,
/// with popularity ranks assigned to R's keys by a seeded permutation.
std::pair<Relation, Relation> generate_relations(const JoinConfig& config);

/// Canonical PK-FK hash join: build on R, probe with every S tuple,
/// materializing (r index, s index) references. Probes must all hit. With
/// the VIP engine the first min(|R|, |S|/61) probes run in learn+adapt and
/// the rest in default mode; the distribution is static, so nothing is
/// sensed.
JoinReport hash_join(const Relation& r, const Relation& s, JoinEngine engine,
                     const JoinConfig& config,
                     std::vector<std::pair<std::uint32_t, std::uint32_t>>* pairs_out = nullptr);

/// Both engines on identical seeded data, medians over the seed set.
JoinComparison compare_join(const JoinConfig& config, const std::vector<std::uint64_t>& seeds);

/// Learn budget for a probe phase: min(|R|, floor(|S| / 61)).
std::uint64_t join_learn_budget(std::uint64_t r_cardinality, std::uint64_t s_cardinality);

/// Bucket count (log2) for building on n keys near the target load factor,
/// clamped into the table's [0.5, 1.5] band.
unsigned pick_bucket_log2(std::uint64_t key_count, double load_factor_target);

}  // namespace viphash
