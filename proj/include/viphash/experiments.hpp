#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "viphash/bench.hpp"
#include "viphash/join.hpp"

namespace viphash {

enum class Scale : std::uint8_t { Desk = 0, Paper = 1 };

struct ExperimentSpec {
    std::string name;  // roofline, roofline-lf, counter-overhead, static,
                       // medium-churn, high-churn, steady-state, read-mostly, join
    Scale scale = Scale::Desk;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::filesystem::path out_dir = ".";
    std::string format = "csv";  // csv | json
};

struct SummaryRow {
    std::string experiment;
    std::string engine;
    double zipf = 0.0;
    double load_factor = 0.0;
    std::uint64_t seed_count = 0;
    double median_throughput_ops_s = 0.0;
    double median_avg_displacement = 0.0;
    std::uint64_t median_total_displacement = 0;
    std::uint64_t median_elapsed_ns = 0;
};

struct ExperimentOutput {
    std::vector<RunResult> runs;
    std::vector<SummaryRow> summary;
};

const std::vector<std::string>& experiment_names();

/// Run one named experiment suite; batch metrics, trigger events, and the
/// per-configuration medians are written under spec.out_dir.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

void emit_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace viphash
