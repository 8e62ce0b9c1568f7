#include "viphash/bench.hpp"

#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

#include "viphash/packed_table.hpp"

namespace viphash {

namespace {

std::uint64_t now_ns() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

struct BatchAgg {
    std::uint64_t displacement = 0;
    std::uint64_t fetches = 0;
    std::uint64_t misses = 0;
};

/// Builds per-batch metrics, tracking mode/event deltas across batches.
struct MetricsBuilder {
    std::uint64_t prev_mode_ops[3] = {0, 0, 0};
    std::size_t prev_event_count = 0;
    std::uint64_t next_batch_index = 0;

    BatchMetrics make(std::size_t count, std::uint64_t elapsed, const BatchAgg& agg,
                      const VipEngine* engine) {
        BatchMetrics m;
        m.batch_index = next_batch_index++;
        m.ops = count;
        m.elapsed_ns = elapsed;
        m.throughput_ops_s =
            elapsed == 0 ? 0.0 : static_cast<double>(count) * 1e9 / static_cast<double>(elapsed);
        m.total_displacement = agg.displacement;
        m.fetch_ops = agg.fetches;
        m.avg_displacement =
            agg.fetches == 0 ? 0.0
                             : static_cast<double>(agg.displacement) / static_cast<double>(agg.fetches);
        m.miss_count = agg.misses;
        if (engine) {
            const std::uint64_t learn = engine->ops_in_mode(Mode::LearnAdapt);
            const std::uint64_t sense = engine->ops_in_mode(Mode::Sense);
            const std::uint64_t dflt = engine->ops_in_mode(Mode::Default);
            m.mode_learn_ops = learn - prev_mode_ops[0];
            m.mode_sense_ops = sense - prev_mode_ops[1];
            m.mode_default_ops = dflt - prev_mode_ops[2];
            prev_mode_ops[0] = learn;
            prev_mode_ops[1] = sense;
            prev_mode_ops[2] = dflt;
            const auto& events = engine->trigger_events();
            for (std::size_t i = prev_event_count; i < events.size(); ++i) {
                if (events[i].to == Mode::LearnAdapt) ++m.learn_triggers;
                if (events[i].to == Mode::Sense) ++m.sense_triggers;
            }
            prev_event_count = events.size();
        } else {
            m.mode_default_ops = count;
        }
        return m;
    }
};

template <typename Table>
void replay_plain(Table& table, const Operation* ops, std::size_t count, BatchAgg& agg) {
    std::uint64_t disp = 0, fetches = 0, misses = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const Operation& op = ops[i];
        switch (op.kind) {
            case Operation::Kind::Fetch: {
                FetchResult f = table.fetch(op.key);
                disp += f.displacement;
                ++fetches;
                misses += f.found ? 0 : 1;
                break;
            }
            case Operation::Kind::Insert:
                table.insert(op.key, op.value);
                break;
            case Operation::Kind::Delete:
                if constexpr (requires(Table& t, Key k) { t.erase(k); })
                    table.erase(op.key);
                break;
        }
    }
    agg.displacement += disp;
    agg.fetches += fetches;
    agg.misses += misses;
}

void replay_vip(VipEngine& engine, const Operation* ops, std::size_t count, BatchAgg& agg) {
    std::uint64_t disp = 0, fetches = 0, misses = 0;
    for (std::size_t i = 0; i < count; ++i) {
        EngineOpResult r = engine.step(ops[i]);
        if (r.is_fetch) {
            disp += r.displacement;
            ++fetches;
            misses += r.found ? 0 : 1;
        }
    }
    agg.displacement += disp;
    agg.fetches += fetches;
    agg.misses += misses;
}

}  // namespace

const char* engine_name(EngineKind kind) {
    switch (kind) {
        case EngineKind::Default: return "default";
        case EngineKind::Vip: return "vip";
        case EngineKind::VipPreconfigured: return "vip-preconfigured";
        case EngineKind::Counter17: return "counter17";
    }
    return "?";
}

void build_vip_preconfigured(const PopularityModel& model, CoreTable& table) {
    for (std::uint64_t rank = model.population(); rank >= 1; --rank) {
        Key k = model.key_of_rank(rank);
        table.insert(k, k);
    }
}

double optimal_expected_displacement(const PopularityModel& model, const CoreTable& table) {
    // Global rank order is popularity order, so walking ranks ascending
    // assigns each key its position in the descending-popularity chain.
    std::vector<std::uint32_t> filled(table.bucket_count(), 0);
    double expected = 0.0;
    for (std::uint64_t rank = 1; rank <= model.population(); ++rank) {
        const std::uint64_t bucket = table.bucket_of(model.key_of_rank(rank));
        const std::uint32_t position = ++filled[bucket];
        expected += model.probability_of_rank(rank) * static_cast<double>(position);
    }
    return expected;
}

RunResult run_workload(const WorkloadConfig& config, EngineKind kind, const RunOptions& options) {
    config.validate();
    WorkloadStream stream(config);

    RunResult result;
    result.experiment = options.experiment_label;
    result.engine = engine_name(kind);
    result.seed = config.random_seed;

    TableConfig table_config;
    if (options.preset_bucket_count_log2)
        table_config.bucket_count_log2 = *options.preset_bucket_count_log2;

    CoreTable table(table_config);
    std::optional<VipEngine> engine;
    std::optional<PackedChainTable<true>> packed17;

    if (kind == EngineKind::Counter17) {
        unsigned log2 = options.preset_bucket_count_log2
                            ? *options.preset_bucket_count_log2
                            : pick_natural_log2(stream.preload().size());
        packed17.emplace(log2, table_config.hash_seed);
        packed17->reserve(stream.preload().size());
        for (auto [k, v] : stream.preload()) packed17->insert(k, v);
    } else if (kind == EngineKind::VipPreconfigured) {
        build_vip_preconfigured(stream.model(), table);
    } else {
        for (auto [k, v] : stream.preload()) table.insert(k, v);
    }
    if (kind == EngineKind::Vip) engine.emplace(std::move(table), options.controller);

    std::vector<Operation> batch(std::min<std::uint64_t>(options.batch_size, config.operation_count));
    MetricsBuilder builder;

    for (;;) {
        std::size_t count = 0;
        Operation op;
        while (count < options.batch_size && stream.next(op)) batch[count++] = op;
        if (count == 0) break;

        BatchAgg agg;
        const std::uint64_t start = now_ns();
        switch (kind) {
            case EngineKind::Default:
            case EngineKind::VipPreconfigured:
                replay_plain(table, batch.data(), count, agg);
                break;
            case EngineKind::Vip:
                replay_vip(*engine, batch.data(), count, agg);
                break;
            case EngineKind::Counter17:
                replay_plain(*packed17, batch.data(), count, agg);
                break;
        }
        const std::uint64_t elapsed = now_ns() - start;
        result.batches.push_back(builder.make(count, elapsed, agg, engine ? &*engine : nullptr));
    }

    if (engine) {
        result.events = engine->trigger_events();
        result.final_bucket_count_log2 = engine->table().bucket_count_log2();
        result.final_load_factor = engine->table().load_factor();
    } else if (kind != EngineKind::Counter17) {
        result.final_bucket_count_log2 = table.bucket_count_log2();
        result.final_load_factor = table.load_factor();
    }
    return result;
}

RunResult run_replay(const ReplayableWorkload& workload, EngineKind kind,
                     const RunOptions& options) {
    if (kind == EngineKind::VipPreconfigured)
        throw std::invalid_argument("preconfigured engine needs a popularity model, not a file");

    RunResult result;
    result.experiment = options.experiment_label;
    result.engine = engine_name(kind);
    result.seed = workload.config.random_seed;

    TableConfig table_config;
    if (options.preset_bucket_count_log2)
        table_config.bucket_count_log2 = *options.preset_bucket_count_log2;

    CoreTable table(table_config);
    std::optional<VipEngine> engine;
    std::optional<PackedChainTable<true>> packed17;

    if (kind == EngineKind::Counter17) {
        unsigned log2 = options.preset_bucket_count_log2
                            ? *options.preset_bucket_count_log2
                            : pick_natural_log2(workload.preload.size());
        packed17.emplace(log2, table_config.hash_seed);
        packed17->reserve(workload.preload.size());
        for (auto [k, v] : workload.preload) packed17->insert(k, v);
    } else {
        for (auto [k, v] : workload.preload) table.insert(k, v);
    }
    if (kind == EngineKind::Vip) engine.emplace(std::move(table), options.controller);

    MetricsBuilder builder;
    const auto& ops = workload.operations;
    for (std::size_t off = 0; off < ops.size(); off += options.batch_size) {
        const std::size_t count = std::min<std::size_t>(options.batch_size, ops.size() - off);
        BatchAgg agg;
        const Operation* view = ops.data() + off;
        const std::uint64_t start = now_ns();
        switch (kind) {
            case EngineKind::Default:
            case EngineKind::VipPreconfigured:
                replay_plain(table, view, count, agg);
                break;
            case EngineKind::Vip:
                replay_vip(*engine, view, count, agg);
                break;
            case EngineKind::Counter17:
                replay_plain(*packed17, view, count, agg);
                break;
        }
        const std::uint64_t elapsed = now_ns() - start;
        result.batches.push_back(builder.make(count, elapsed, agg, engine ? &*engine : nullptr));
    }

    if (engine) {
        result.events = engine->trigger_events();
        result.final_bucket_count_log2 = engine->table().bucket_count_log2();
        result.final_load_factor = engine->table().load_factor();
    } else if (kind != EngineKind::Counter17) {
        result.final_bucket_count_log2 = table.bucket_count_log2();
        result.final_load_factor = table.load_factor();
    }
    return result;
}

std::uint64_t RunResult::total_ops() const {
    std::uint64_t n = 0;
    for (const auto& b : batches) n += b.ops;
    return n;
}
std::uint64_t RunResult::total_displacement() const {
    std::uint64_t n = 0;
    for (const auto& b : batches) n += b.total_displacement;
    return n;
}
std::uint64_t RunResult::total_fetches() const {
    std::uint64_t n = 0;
    for (const auto& b : batches) n += b.fetch_ops;
    return n;
}
std::uint64_t RunResult::total_misses() const {
    std::uint64_t n = 0;
    for (const auto& b : batches) n += b.miss_count;
    return n;
}
std::uint64_t RunResult::elapsed_ns() const {
    std::uint64_t n = 0;
    for (const auto& b : batches) n += b.elapsed_ns;
    return n;
}
double RunResult::throughput_ops_s() const {
    const std::uint64_t ns = elapsed_ns();
    return ns == 0 ? 0.0 : static_cast<double>(total_ops()) * 1e9 / static_cast<double>(ns);
}
double RunResult::avg_displacement() const {
    const std::uint64_t f = total_fetches();
    return f == 0 ? 0.0 : static_cast<double>(total_displacement()) / static_cast<double>(f);
}
std::uint64_t RunResult::ops_in_mode_learn() const {
    std::uint64_t n = 0;
    for (const auto& b : batches) n += b.mode_learn_ops;
    return n;
}

void emit_csv(std::ostream& os, const std::vector<RunResult>& runs) {
    os << "experiment,engine,seed,batch,ops,elapsed_ns,throughput_ops_s,total_displacement,"
          "avg_displacement,miss_count,mode_learn_ops,mode_sense_ops,mode_default_ops,"
          "learn_triggers,sense_triggers\n";
    for (const auto& run : runs) {
        for (const auto& b : run.batches) {
            os << run.experiment << ',' << run.engine << ',' << run.seed << ',' << b.batch_index
               << ',' << b.ops << ',' << b.elapsed_ns << ',' << b.throughput_ops_s << ','
               << b.total_displacement << ',' << b.avg_displacement << ',' << b.miss_count << ','
               << b.mode_learn_ops << ',' << b.mode_sense_ops << ',' << b.mode_default_ops << ','
               << b.learn_triggers << ',' << b.sense_triggers << '\n';
        }
    }
}

void emit_trigger_events_csv(std::ostream& os, const std::vector<RunResult>& runs) {
    os << "experiment,engine,seed,op_index,from_mode,to_mode\n";
    for (const auto& run : runs)
        for (const auto& e : run.events)
            os << run.experiment << ',' << run.engine << ',' << run.seed << ',' << e.op_index << ','
               << mode_name(e.from) << ',' << mode_name(e.to) << '\n';
}

void emit_json(std::ostream& os, const std::vector<RunResult>& runs) {
    nlohmann::json root = nlohmann::json::array();
    for (const auto& run : runs) {
        nlohmann::json jr;
        jr["experiment"] = run.experiment;
        jr["engine"] = run.engine;
        jr["seed"] = run.seed;
        jr["batches"] = nlohmann::json::array();
        for (const auto& b : run.batches) {
            jr["batches"].push_back({{"batch", b.batch_index},
                                     {"ops", b.ops},
                                     {"elapsed_ns", b.elapsed_ns},
                                     {"throughput_ops_s", b.throughput_ops_s},
                                     {"total_displacement", b.total_displacement},
                                     {"avg_displacement", b.avg_displacement},
                                     {"miss_count", b.miss_count},
                                     {"mode_learn_ops", b.mode_learn_ops},
                                     {"mode_sense_ops", b.mode_sense_ops},
                                     {"mode_default_ops", b.mode_default_ops},
                                     {"learn_triggers", b.learn_triggers},
                                     {"sense_triggers", b.sense_triggers}});
        }
        jr["trigger_events"] = nlohmann::json::array();
        for (const auto& e : run.events) {
            nlohmann::json je{{"op_index", e.op_index},
                              {"from_mode", mode_name(e.from)},
                              {"to_mode", mode_name(e.to)}};
            if (e.has_gammas) {
                je["gamma_baseline"] = {{"u", e.baseline.u}, {"w", e.baseline.w}};
                je["gamma_current"] = {{"u", e.current.u}, {"w", e.current.w}};
            }
            jr["trigger_events"].push_back(je);
        }
        root.push_back(jr);
    }
    os << root.dump(2) << '\n';
}

}  // namespace viphash
