#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "viphash/adapt.hpp"
#include "viphash/core_table.hpp"
#include "viphash/sense.hpp"
#include "viphash/workload.hpp"

namespace viphash {

enum class Mode : std::uint8_t { LearnAdapt = 0, Sense = 1, Default = 2 };

const char* mode_name(Mode mode);

/// Request budgets for the three modes. The learn budget tracks the table
/// size (ceil of 1.5x the bucket count, which bounds the key count under
/// the load-factor cap) and the default span keeps an exact 60:1 ratio to
/// it, capping the worst-case learning overhead.
struct ControllerParams {
    std::uint64_t sense_span = 1000;            // N_S
    std::uint64_t default_to_learn_ratio = 60;  // N_D / N_L
    double confidence = 0.95;                   // c
    double slowdown_factor = 4.0;               // k: worst-case learn-mode slowdown
    std::uint64_t max_sense_extensions = 10;
};

/// N_L for a table with the given bucket count: ceil(1.5 * buckets).
inline std::uint64_t learn_budget(std::uint64_t bucket_count) {
    return bucket_count + (bucket_count + 1) / 2;
}

/// Worst-case throughput loss from learning:
/// 1 - (N_D + N_L) / (N_D + k * N_L).
inline double overhead_cap(std::uint64_t n_learn, std::uint64_t n_default, double slowdown_k) {
    const double nl = static_cast<double>(n_learn);
    const double nd = static_cast<double>(n_default);
    return 1.0 - (nd + nl) / (nd + slowdown_k * nl);
}

/// Mode transition, stamped with the operation index at which it fired.
/// Transitions out of a completed compare window carry both gammas.
struct TriggerEvent {
    std::uint64_t op_index;
    Mode from;
    Mode to;
    bool has_gammas = false;
    SenseStats baseline{};
    SenseStats current{};
};

struct EngineOpResult {
    bool found = false;
    Value value = 0;
    std::uint64_t displacement = 0;
    bool is_fetch = false;
    Mode mode = Mode::Default;
};

/// Adaptive engine: cycles learn+adapt -> sense (baseline) -> default ->
/// sense (compare), re-entering learn+adapt only when the compare window's
/// confidence interval is disjoint from the baseline's.
///
/// Every operation counts against the current mode's budget; only
/// successful fetches feed the sense statistics. A sense window that ends
/// with fewer than two samples is extended by another N_S, at most
/// max_sense_extensions times, then abandoned without a comparison.
/// Rehashes rescale N_L and N_D from the new bucket count without
/// resetting the running countdown. Apart from the counter-mirror build at
/// a learn transition (amortized over the learn window), every step is
/// O(chain walk) + O(1).
class VipEngine {
public:
    explicit VipEngine(CoreTable table, const ControllerParams& params = {},
                       CacheReclaimHook reclaim = {});

    EngineOpResult step(const Operation& op);

    EngineOpResult fetch(Key key) { return step({Operation::Kind::Fetch, key, 0}); }
    EngineOpResult insert(Key key, Value value) { return step({Operation::Kind::Insert, key, value}); }
    EngineOpResult erase(Key key) { return step({Operation::Kind::Delete, key, 0}); }

    Mode mode() const { return mode_; }
    std::uint64_t remaining_in_mode() const { return remaining_; }
    std::uint64_t n_learn() const { return n_learn_; }
    std::uint64_t n_default() const { return n_default_; }
    const ControllerParams& params() const { return params_; }
    const std::optional<SenseStats>& baseline() const { return baseline_; }

    const CoreTable& table() const { return table_; }
    CoreTable& table() { return table_; }

    std::uint64_t op_index() const { return op_index_; }
    std::uint64_t ops_in_mode(Mode mode) const { return mode_ops_[static_cast<int>(mode)]; }
    const std::vector<TriggerEvent>& trigger_events() const { return events_; }

    /// Test hook: force the baseline gamma.
    void set_baseline(const SenseStats& stats) { baseline_ = stats; }

private:
    void advance_mode();
    void enter_sense(bool establishes_baseline);
    void enter_default();
    void enter_learn();
    void on_rehash();
    void emit(Mode to, const SenseStats* gamma_baseline, const SenseStats* gamma_current);

    CoreTable table_;
    ControllerParams params_;
    CacheReclaimHook reclaim_;
    std::uint64_t n_learn_;
    std::uint64_t n_default_;

    Mode mode_ = Mode::LearnAdapt;
    std::uint64_t remaining_;
    bool sense_establishes_baseline_ = true;
    std::uint64_t sense_extensions_ = 0;
    std::optional<SenseStats> baseline_;
    SenseAccumulator acc_;
    std::optional<RequestCounters> counters_;

    std::uint64_t op_index_ = 0;
    std::uint64_t mode_ops_[3] = {0, 0, 0};
    std::uint64_t rehash_seen_;
    std::vector<TriggerEvent> events_;
};

}  // namespace viphash
