#include "viphash/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace viphash {

namespace {

double median_d(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}
std::uint64_t median_u(std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

struct PointConfig {
    double zipf;
    std::uint64_t initial_size;
    std::uint64_t operation_count;
    double fetch_p = 1.0, insert_p = 0.0, delete_p = 0.0;
    std::uint64_t shift_freq = 0;
    double shift_prct = 0.0;
    std::optional<unsigned> preset_log2;
    std::vector<EngineKind> engines;
};

SummaryRow summarize(const std::string& experiment, const std::string& engine, double zipf,
                     double load_factor, const std::vector<const RunResult*>& runs) {
    SummaryRow row;
    row.experiment = experiment;
    row.engine = engine;
    row.zipf = zipf;
    row.load_factor = load_factor;
    row.seed_count = runs.size();
    std::vector<double> tput, disp;
    std::vector<std::uint64_t> total, ns;
    for (const RunResult* r : runs) {
        tput.push_back(r->throughput_ops_s());
        disp.push_back(r->avg_displacement());
        total.push_back(r->total_displacement());
        ns.push_back(r->elapsed_ns());
    }
    row.median_throughput_ops_s = median_d(std::move(tput));
    row.median_avg_displacement = median_d(std::move(disp));
    row.median_total_displacement = median_u(std::move(total));
    row.median_elapsed_ns = median_u(std::move(ns));
    return row;
}

void run_point_experiment(const ExperimentSpec& spec, const std::vector<PointConfig>& configs,
                          ExperimentOutput& out) {
    for (const PointConfig& pc : configs) {
        for (EngineKind kind : pc.engines) {
            std::vector<const RunResult*> for_summary;
            for (std::uint64_t seed : spec.seeds) {
                WorkloadConfig wc;
                wc.zipf = pc.zipf;
                wc.initial_size = pc.initial_size;
                wc.operation_count = pc.operation_count;
                wc.fetch_proportion = pc.fetch_p;
                wc.insert_proportion = pc.insert_p;
                wc.delete_proportion = pc.delete_p;
                wc.dist_shift_freq = pc.shift_freq;
                wc.dist_shift_prct = pc.shift_prct;
                wc.random_seed = seed;

                RunOptions options;
                options.preset_bucket_count_log2 = pc.preset_log2;
                options.experiment_label = spec.name;
                out.runs.push_back(run_workload(wc, kind, options));
                for_summary.push_back(&out.runs.back());
            }
            double lf = static_cast<double>(pc.initial_size) /
                        static_cast<double>(std::uint64_t{1}
                                            << (pc.preset_log2 ? *pc.preset_log2
                                                               : pick_natural_log2(pc.initial_size)));
            out.summary.push_back(
                summarize(spec.name, engine_name(kind), pc.zipf, lf, for_summary));
        }
    }
}

void run_join_experiment(const ExperimentSpec& spec, ExperimentOutput& out) {
    const bool paper = spec.scale == Scale::Paper;
    const std::uint64_t pk = paper ? 12'000'000ull : 100'000ull;
    for (double zipf : {0.0, 1.0, 2.0, 3.0}) {
        JoinConfig jc;
        jc.pk_cardinality = pk;
        jc.fk_to_pk_ratio = 16;
        jc.zipf = zipf;
        jc.load_factor_target = 1.4;
        JoinComparison cmp = compare_join(jc, spec.seeds);

        for (int side = 0; side < 2; ++side) {
            const auto& reports = side == 0 ? cmp.default_runs : cmp.vip_runs;
            SummaryRow row;
            row.experiment = spec.name;
            row.engine = side == 0 ? "default" : "vip";
            row.zipf = zipf;
            row.load_factor = reports.front().build_load_factor;
            row.seed_count = reports.size();
            std::vector<double> disp;
            std::vector<std::uint64_t> ns, total;
            for (const auto& r : reports) {
                disp.push_back(r.avg_displacement);
                ns.push_back(r.probe_ns + r.build_ns);
                total.push_back(r.total_displacement);
            }
            row.median_avg_displacement = median_d(std::move(disp));
            row.median_elapsed_ns = median_u(ns);
            row.median_total_displacement = median_u(std::move(total));
            std::vector<std::uint64_t> probe_ns_sorted = ns;
            row.median_throughput_ops_s =
                static_cast<double>(pk * jc.fk_to_pk_ratio) * 1e9 /
                static_cast<double>(median_u(std::move(probe_ns_sorted)));
            out.summary.push_back(row);
        }
    }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "roofline",     "roofline-lf",  "counter-overhead", "static", "medium-churn",
        "high-churn",   "steady-state", "read-mostly",      "join"};
    return names;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
    const bool paper = spec.scale == Scale::Paper;
    ExperimentOutput out;

    const std::vector<EngineKind> roof_engines = {EngineKind::Default, EngineKind::VipPreconfigured};
    const std::vector<EngineKind> adaptive_engines = {EngineKind::Default, EngineKind::Vip};
    const std::vector<EngineKind> static_engines = {EngineKind::Default, EngineKind::Vip,
                                                    EngineKind::VipPreconfigured};

    if (spec.name == "roofline") {
        std::vector<PointConfig> configs;
        for (double z : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0}) {
            PointConfig pc{z,
                           paper ? 10'000'000ull : 1'250'000ull,
                           paper ? 1'000'000'000ull : 5'000'000ull};
            pc.preset_log2 = paper ? 24u : 21u;  // load factor 0.6
            pc.engines = roof_engines;
            configs.push_back(pc);
        }
        run_point_experiment(spec, configs, out);
    } else if (spec.name == "roofline-lf") {
        std::vector<PointConfig> configs;
        const unsigned log2 = paper ? 24u : 20u;
        const std::uint64_t buckets = std::uint64_t{1} << log2;
        for (double z : {1.0, 2.0, 3.0}) {
            for (double lf : {0.5, 0.75, 1.0, 1.25, 1.5}) {
                PointConfig pc{z, static_cast<std::uint64_t>(lf * static_cast<double>(buckets)),
                               paper ? 1'000'000'000ull : 5'000'000ull};
                pc.preset_log2 = log2;
                pc.engines = roof_engines;
                configs.push_back(pc);
            }
        }
        run_point_experiment(spec, configs, out);
    } else if (spec.name == "counter-overhead") {
        std::vector<PointConfig> configs;
        for (double z : {0.0, 1.0, 2.0}) {
            PointConfig pc{z, paper ? 10'000'000ull : 1'000'000ull,
                           paper ? 500'000'000ull : 20'000'000ull};
            pc.engines = {EngineKind::Default, EngineKind::Counter17};
            configs.push_back(pc);
        }
        run_point_experiment(spec, configs, out);
    } else if (spec.name == "static") {
        std::vector<PointConfig> configs;
        for (double z : {0.0, 1.0, 1.5, 2.0}) {
            PointConfig pc{z, paper ? 10'000'000ull : 1'000'000ull,
                           paper ? 500'000'000ull : 100'000'000ull};
            pc.engines = static_engines;
            configs.push_back(pc);
        }
        run_point_experiment(spec, configs, out);
    } else if (spec.name == "medium-churn" || spec.name == "high-churn") {
        const bool high = spec.name == "high-churn";
        std::vector<PointConfig> configs;
        for (double z : {1.0, 1.5}) {
            PointConfig pc{z, paper ? 10'000'000ull : 1'000'000ull,
                           paper ? 500'000'000ull : 100'000'000ull};
            pc.shift_freq = high ? (paper ? 10'000'000ull : 2'000'000ull)
                                 : (paper ? 100'000'000ull : 10'000'000ull);
            pc.shift_prct = high ? 50.0 : 25.0;
            pc.engines = adaptive_engines;
            configs.push_back(pc);
        }
        run_point_experiment(spec, configs, out);
    } else if (spec.name == "steady-state" || spec.name == "read-mostly") {
        const bool steady = spec.name == "steady-state";
        std::vector<PointConfig> configs;
        for (double z : {1.0, 1.5}) {
            PointConfig pc{z, paper ? 10'000'000ull : 1'000'000ull,
                           paper ? 500'000'000ull : 100'000'000ull};
            pc.fetch_p = 0.98;
            pc.insert_p = steady ? 0.01 : 0.02;
            pc.delete_p = steady ? 0.01 : 0.0;
            pc.engines = adaptive_engines;
            configs.push_back(pc);
        }
        run_point_experiment(spec, configs, out);
    } else if (spec.name == "join") {
        run_join_experiment(spec, out);
    } else {
        throw std::invalid_argument("unknown experiment: " + spec.name);
    }

    std::filesystem::create_directories(spec.out_dir);
    const auto base = spec.out_dir / spec.name;
    if (!out.runs.empty()) {
        if (spec.format == "json") {
            std::ofstream os(base.string() + "_batches.json");
            emit_json(os, out.runs);
        } else {
            std::ofstream os(base.string() + "_batches.csv");
            emit_csv(os, out.runs);
        }
        std::ofstream ev(base.string() + "_events.csv");
        emit_trigger_events_csv(ev, out.runs);
    }
    std::ofstream sm(base.string() + "_summary.csv");
    emit_summary_csv(sm, out.summary);
    return out;
}

void emit_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "experiment,engine,zipf,load_factor,seeds,median_throughput_ops_s,"
          "median_avg_displacement,median_total_displacement,median_elapsed_ns\n";
    for (const auto& r : rows) {
        os << r.experiment << ',' << r.engine << ',' << r.zipf << ',' << r.load_factor << ','
           << r.seed_count << ',' << r.median_throughput_ops_s << ',' << r.median_avg_displacement
           << ',' << r.median_total_displacement << ',' << r.median_elapsed_ns << '\n';
    }
}

}  // namespace viphash
