#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "viphash/controller.hpp"
#include "viphash/workload.hpp"

namespace viphash {

enum class EngineKind : std::uint8_t { Default = 0, Vip = 1, VipPreconfigured = 2, Counter17 = 3 };

const char* engine_name(EngineKind kind);

/// Fine-grained metrics for one batch of (at most) a million operations.
struct BatchMetrics {
    std::uint64_t batch_index = 0;
    std::uint64_t ops = 0;
    std::uint64_t elapsed_ns = 0;
    double throughput_ops_s = 0.0;
    std::uint64_t total_displacement = 0;
    double avg_displacement = 0.0;  // per fetch
    std::uint64_t fetch_ops = 0;
    std::uint64_t miss_count = 0;
    std::uint64_t mode_learn_ops = 0;
    std::uint64_t mode_sense_ops = 0;
    std::uint64_t mode_default_ops = 0;
    std::uint32_t learn_triggers = 0;
    std::uint32_t sense_triggers = 0;
};

struct RunResult {
    std::string experiment;
    std::string engine;
    std::uint64_t seed = 0;
    std::vector<BatchMetrics> batches;
    std::vector<TriggerEvent> events;
    unsigned final_bucket_count_log2 = 0;
    double final_load_factor = 0.0;

    std::uint64_t total_ops() const;
    std::uint64_t total_displacement() const;
    std::uint64_t total_fetches() const;
    std::uint64_t total_misses() const;
    std::uint64_t elapsed_ns() const;
    double throughput_ops_s() const;
    double avg_displacement() const;
    std::uint64_t ops_in_mode_learn() const;
};

struct RunOptions {
    std::uint64_t batch_size = 1'000'000;
    /// Preset bucket count; absent means a small table grown by the preload.
    std::optional<unsigned> preset_bucket_count_log2;
    std::string experiment_label;
    ControllerParams controller;
};

/// Preload a table from the workload's key population and replay the
/// operation stream against the chosen engine, batch by batch. Generation
/// runs outside the timed sections. The operation stream for a given
/// (config, seed) is identical for every engine kind.
RunResult run_workload(const WorkloadConfig& config, EngineKind kind, const RunOptions& options = {});

/// Replay a workload loaded from disk. The preconfigured engine is not
/// available here: the file carries no popularity model.
RunResult run_replay(const ReplayableWorkload& workload, EngineKind kind,
                     const RunOptions& options = {});

/// Insert the population in ascending popularity order (rank N first):
/// front insertion then leaves every chain in descending popularity order,
/// the arrangement with the least expected displacement.
void build_vip_preconfigured(const PopularityModel& model, CoreTable& table);

/// Expected displacement per fetch of the popularity-descending
/// arrangement, computed analytically from the pmf and bucket membership.
/// This is the minimum over all chain orders.
double optimal_expected_displacement(const PopularityModel& model, const CoreTable& table);

void emit_csv(std::ostream& os, const std::vector<RunResult>& runs);
void emit_json(std::ostream& os, const std::vector<RunResult>& runs);
void emit_trigger_events_csv(std::ostream& os, const std::vector<RunResult>& runs);

}  // namespace viphash
