#include "viphash/join.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "viphash/adapt.hpp"
#include "viphash/rng.hpp"
#include "viphash/workload.hpp"

namespace viphash {

namespace {

std::uint64_t now_ns() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

template <typename T>
T median_of(std::vector<T> values) {
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
}

}  // namespace

std::uint64_t join_learn_budget(std::uint64_t r_cardinality, std::uint64_t s_cardinality) {
    return std::min(r_cardinality, s_cardinality / 61);
}

unsigned pick_bucket_log2(std::uint64_t key_count, double load_factor_target) {
    unsigned b = 1;
    double best_gap = 1e300;
    unsigned best = 1;
    for (b = 1; b < 40; ++b) {
        double lf = static_cast<double>(key_count) / static_cast<double>(std::uint64_t{1} << b);
        if (lf > 1.5) continue;  // growth would fire during the build anyway
        double gap = std::abs(lf - load_factor_target);
        if (gap < best_gap) {
            best_gap = gap;
            best = b;
        }
        if (lf < 0.5) break;  // further doubling only moves away from the band
    }
    return best;
}

std::pair<Relation, Relation> generate_relations(const JoinConfig& config) {
    Xoshiro256 rng(config.random_seed);

    Relation r;
    r.role = Relation::Role::PrimaryKey;
    r.tuples.reserve(config.pk_cardinality);
    for (std::uint64_t k = 1; k <= config.pk_cardinality; ++k) r.tuples.emplace_back(k, rng.next());

    // seeded rank permutation over the PK domain
    std::vector<Key> rank_order(config.pk_cardinality);
    for (std::uint64_t i = 0; i < config.pk_cardinality; ++i) rank_order[i] = i + 1;
    for (std::uint64_t i = config.pk_cardinality - 1; i > 0; --i) {
        std::uint64_t j = rng.next_below(i + 1);
        std::swap(rank_order[i], rank_order[j]);
    }
    PopularityModel model(config.zipf, std::move(rank_order));

    Relation s;
    s.role = Relation::Role::ForeignKey;
    const std::uint64_t s_count = config.pk_cardinality * config.fk_to_pk_ratio;
    s.tuples.reserve(s_count);
    for (std::uint64_t i = 0; i < s_count; ++i) s.tuples.emplace_back(model.sample_key(rng), rng.next());
    return {std::move(r), std::move(s)};
}

JoinReport hash_join(const Relation& r, const Relation& s, JoinEngine engine,
                     const JoinConfig& config,
                     std::vector<std::pair<std::uint32_t, std::uint32_t>>* pairs_out) {
    JoinReport report;
    report.engine = engine;

    TableConfig table_config;
    table_config.bucket_count_log2 = pick_bucket_log2(r.tuples.size(), config.load_factor_target);
    table_config.hash_seed = 0;
    CoreTable table(table_config);

    const std::uint64_t build_start = now_ns();
    for (std::uint32_t i = 0; i < r.tuples.size(); ++i) table.insert(r.tuples[i].first, i);
    report.build_ns = now_ns() - build_start;
    report.bucket_count_log2 = table.bucket_count_log2();
    report.build_load_factor = table.load_factor();

    if (pairs_out) {
        pairs_out->clear();
        pairs_out->reserve(s.tuples.size());
    }

    const std::uint64_t learn_budget_probes =
        engine == JoinEngine::Vip ? join_learn_budget(r.tuples.size(), s.tuples.size()) : 0;
    report.learn_probes = learn_budget_probes;

    std::uint64_t total_displacement = 0;
    const std::uint64_t probe_start = now_ns();

    std::uint64_t i = 0;
    if (learn_budget_probes > 0) {
        RequestCounters counters = begin_learn(table);
        for (; i < learn_budget_probes && i < s.tuples.size(); ++i) {
            FetchResult f = fetch_adaptive(table, counters, s.tuples[i].first);
            if (!f.found) throw JoinIntegrityError{};
            total_displacement += f.displacement;
            if (pairs_out)
                pairs_out->emplace_back(static_cast<std::uint32_t>(f.value),
                                        static_cast<std::uint32_t>(i));
        }
        end_learn(std::move(counters));
        report.learn_ns = now_ns() - probe_start;
    }
    for (; i < s.tuples.size(); ++i) {
        FetchResult f = table.fetch(s.tuples[i].first);
        if (!f.found) throw JoinIntegrityError{};
        total_displacement += f.displacement;
        if (pairs_out)
            pairs_out->emplace_back(static_cast<std::uint32_t>(f.value),
                                    static_cast<std::uint32_t>(i));
    }
    report.probe_ns = now_ns() - probe_start;
    report.output_cardinality = s.tuples.size();
    report.total_displacement = total_displacement;
    report.avg_displacement =
        s.tuples.empty() ? 0.0
                         : static_cast<double>(total_displacement) / static_cast<double>(s.tuples.size());
    return report;
}

JoinComparison compare_join(const JoinConfig& config, const std::vector<std::uint64_t>& seeds) {
    JoinComparison cmp;
    std::vector<double> d_disp, v_disp;
    std::vector<std::uint64_t> d_ns, v_ns;
    for (std::uint64_t seed : seeds) {
        JoinConfig c = config;
        c.random_seed = seed;
        auto [r, s] = generate_relations(c);
        JoinReport dr = hash_join(r, s, JoinEngine::Default, c);
        JoinReport vr = hash_join(r, s, JoinEngine::Vip, c);
        d_disp.push_back(dr.avg_displacement);
        v_disp.push_back(vr.avg_displacement);
        d_ns.push_back(dr.probe_ns);
        v_ns.push_back(vr.probe_ns);
        cmp.default_runs.push_back(dr);
        cmp.vip_runs.push_back(vr);
    }
    cmp.median_default_avg_displacement = median_of(d_disp);
    cmp.median_vip_avg_displacement = median_of(v_disp);
    cmp.median_default_probe_ns = median_of(d_ns);
    cmp.median_vip_probe_ns = median_of(v_ns);
    return cmp;
}

}  // namespace viphash
