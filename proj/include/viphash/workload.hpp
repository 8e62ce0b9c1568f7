#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "viphash/core_table.hpp"
#include "viphash/rng.hpp"

namespace viphash {

enum class KeyPattern : std::uint8_t { Random = 0, Sequential = 1 };
enum class KeyOrder : std::uint8_t { Random = 0, Sorted = 1 };

struct WorkloadConfig {
    double zipf = 0.0;
    std::uint64_t initial_size = 0;
    std::uint64_t operation_count = 0;
    double fetch_proportion = 1.0;
    double insert_proportion = 0.0;
    double delete_proportion = 0.0;
    /// A popularity shift occurs after every dist_shift_freq operations
    /// (0 disables churn).
    std::uint64_t dist_shift_freq = 0;
    double dist_shift_prct = 0.0;
    KeyPattern key_pattern = KeyPattern::Random;
    KeyOrder key_order = KeyOrder::Random;
    std::uint64_t random_seed = 0;

    void validate() const;  // throws std::invalid_argument
};

struct Operation {
    enum class Kind : std::uint8_t { Fetch = 0, Insert = 1, Delete = 2 };
    Kind kind = Kind::Fetch;
    Key key = 0;
    Value value = 0;  // meaningful for Insert only
};

struct BadMagic : std::runtime_error {
    BadMagic() : std::runtime_error("not a workload file (bad magic)") {}
};
struct CorruptWorkload : std::runtime_error {
    explicit CorruptWorkload(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// Sequence of keys ordered by popularity rank with O(log n) positional
/// access, insertion, and removal (size-augmented treap; priorities come
/// from a private splitmix64 stream so the workload draw sequence does not
/// depend on this structure).
class OrderStatTree {
public:
    static constexpr std::uint32_t npos = 0xffffffffu;

    void build(const std::vector<Key>& keys);
    std::uint64_t size() const { return root_ == npos ? 0 : arena_[root_].size; }
    Key at(std::uint64_t pos) const;
    void set_at(std::uint64_t pos, Key key);
    void insert_at(std::uint64_t pos, Key key);
    Key erase_at(std::uint64_t pos);

private:
    struct TNode {
        Key key;
        std::uint64_t prio;
        std::uint32_t left, right, size;
    };

    std::uint32_t new_node(Key key);
    void update(std::uint32_t t);
    std::uint32_t merge(std::uint32_t a, std::uint32_t b);
    void split(std::uint32_t t, std::uint64_t count, std::uint32_t& left, std::uint32_t& right);

    std::vector<TNode> arena_;
    std::uint32_t root_ = npos;
    std::uint32_t free_ = npos;
    std::uint64_t prio_state_ = 0x5eed0f0c1ed5eedull;
};

}  // namespace detail

/// Zipfian popularity over a key population: rank r is requested with
/// probability proportional to r^-s (uniform at s = 0). Holds the
/// rank-to-key bijection, which is all that churn and population changes
/// ever touch; the pmf over ranks depends only on the population size.
class PopularityModel {
public:
    PopularityModel(double exponent, std::vector<Key> keys_in_rank_order);

    double exponent() const { return s_; }
    std::uint64_t population() const { return population_; }
    bool contains(Key key) const { return present_.count(key) != 0; }

    Key key_of_rank(std::uint64_t rank) const;  // 1-based
    double probability_of_rank(std::uint64_t rank) const;
    double total_weight() const { return cum_[population_ - 1]; }
    /// cumulative_weights()[i] is the unnormalized mass of ranks 1..i+1;
    /// may extend beyond the current population.
    const std::vector<double>& cumulative_weights() const { return cum_; }

    /// Inverse-CDF draw: binary search on the cumulative weight array,
    /// narrowed by a quantile index when the population is static.
    std::uint64_t sample_rank(Xoshiro256& rng) const;
    Key sample_key(Xoshiro256& rng) const { return key_of_rank(sample_rank(rng)); }

    /// Smallest m such that ranks 1..m carry at least `fraction` of the
    /// request mass.
    std::uint64_t churn_prefix_size(double fraction) const;

    /// Shift the hot set: the top-m keys (m from churn_prefix_size) swap
    /// ranks with distinct uniformly drawn keys of rank > m. The pmf over
    /// ranks is untouched. Returns m.
    std::uint64_t apply_churn(Xoshiro256& rng, double shift_prct);

    /// New key enters at a uniformly random rank position.
    void insert_key_at_random_rank(Key key, Xoshiro256& rng);
    /// Remove and return a uniformly random present key.
    Key erase_uniform_key(Xoshiro256& rng);
    /// Draw a key not currently present (used for inserts and miss probes).
    Key fresh_key(Xoshiro256& rng) const;

private:
    void ensure_weights(std::uint64_t n);
    void rebuild_lut();
    void materialize_tree();

    double s_;
    std::uint64_t population_;
    std::vector<double> cum_;  // cum_[i] = sum of (j+1)^-s for j <= i
    std::vector<Key> rank_to_key_;  // valid while tree not materialized
    detail::OrderStatTree tree_;
    bool tree_built_ = false;
    std::unordered_set<Key> present_;
    std::vector<std::uint32_t> lut_;  // quantile brackets into cum_
};

/// Deterministic operation stream for one (config, seed): preload set plus
/// operation_count operations with the configured mix and churn cadence.
/// Identical configs produce bit-identical streams.
class WorkloadStream {
public:
    explicit WorkloadStream(const WorkloadConfig& config);

    const WorkloadConfig& config() const { return config_; }
    /// Keys and values to insert before the measured run, in insertion order.
    const std::vector<std::pair<Key, Value>>& preload() const { return preload_; }
    bool next(Operation& out);
    std::uint64_t emitted() const { return emitted_; }

    PopularityModel& model() { return model_; }
    const PopularityModel& model() const { return model_; }

private:
    WorkloadConfig config_;
    Xoshiro256 rng_;
    // preload_ is declared (and constructed) before model_: the model's
    // initializer fills it while generating the key population.
    std::vector<std::pair<Key, Value>> preload_;
    PopularityModel model_;
    std::uint64_t emitted_ = 0;
};

/// Whole workload materialized from a file.
struct ReplayableWorkload {
    WorkloadConfig config;
    std::vector<std::pair<Key, Value>> preload;
    std::vector<Operation> operations;
};

void write_workload(const WorkloadConfig& config, const std::filesystem::path& path);
ReplayableWorkload read_workload(const std::filesystem::path& path);

std::vector<Operation> generate_operations(const WorkloadConfig& config);

}  // namespace viphash
