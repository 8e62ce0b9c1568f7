#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "viphash/bench.hpp"
#include "viphash/experiments.hpp"
#include "viphash/join.hpp"

using namespace viphash;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
    return seeds;
}

void write_runs(const std::vector<RunResult>& runs, const std::string& out,
                const std::string& format) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty() && out != "-") {
        file.open(out, std::ios::trunc);
        if (!file) throw std::runtime_error("cannot open " + out);
        os = &file;
    }
    if (format == "json")
        emit_json(*os, runs);
    else
        emit_csv(*os, runs);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Chained hash table benchmark: skewed workload generation, adaptive "
        "(VIP) engines, and the canned experiment suite"};

    WorkloadConfig wc;
    wc.initial_size = 1'000'000;
    wc.operation_count = 10'000'000;
    std::string storage_engine = "ChainedHashing";
    std::string key_pattern = "random";
    std::string key_order = "random";
    std::string experiment;
    std::string seeds_text = "0,1,2,3,4,5,6,7,8,9";
    std::string scale = "desk";
    std::string out;
    std::string format = "csv";
    std::string workload_file;
    std::uint64_t batch_size = 1'000'000;

    app.add_option("--zipf", wc.zipf, "Zipfian factor of the popularity distribution (0 = uniform)");
    app.add_option("--initial-size", wc.initial_size, "Keys in the table before any operation runs");
    app.add_option("--operation-count", wc.operation_count, "Total operations to run");
    app.add_option("--fetch-proportion", wc.fetch_proportion, "Proportion of fetch operations");
    app.add_option("--insert-proportion", wc.insert_proportion, "Proportion of insert operations");
    app.add_option("--delete-proportion", wc.delete_proportion, "Proportion of delete operations");
    app.add_option("--dist-shift-freq", wc.dist_shift_freq,
                   "Popularity shift after every this many operations (0 = never)");
    app.add_option("--dist-shift-prct", wc.dist_shift_prct,
                   "Percent of request mass whose top keys are replaced per shift");
    app.add_option("--storage-engine", storage_engine,
                   "ChainedHashing (default), VIPHashing, or none (store workload to disk)")
        ->check(CLI::IsMember({"ChainedHashing", "VIPHashing", "none"}));
    app.add_option("--key-pattern", key_pattern, "random (default) or sequential")
        ->check(CLI::IsMember({"random", "sequential"}));
    app.add_option("--key-order", key_order,
                   "Popularity rank relative to insertion order: random (default) or sorted")
        ->check(CLI::IsMember({"random", "sorted"}));
    app.add_option("--random-seed", wc.random_seed, "Seed for population and workload generation");

    app.add_option("--experiment", experiment,
                   "Run a canned experiment suite instead of a single workload")
        ->check(CLI::IsMember(experiment_names()));
    app.add_option("--seeds", seeds_text, "Comma-separated seed list for experiments");
    app.add_option("--scale", scale, "desk (default) or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--out", out, "Output file (single run / workload) or directory (experiments)");
    app.add_option("--format", format, "csv (default) or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--workload-file", workload_file, "Replay a stored workload file");
    app.add_option("--batch-size", batch_size, "Operations per metrics batch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (!experiment.empty()) {
            ExperimentSpec spec;
            spec.name = experiment;
            spec.scale = scale == "paper" ? Scale::Paper : Scale::Desk;
            spec.seeds = parse_seeds(seeds_text);
            spec.out_dir = out.empty() ? "results" : out;
            spec.format = format;
            ExperimentOutput result = run_experiment(spec);
            emit_summary_csv(std::cout, result.summary);
            std::cerr << "wrote " << (spec.out_dir / (spec.name + "_summary.csv")).string() << '\n';
            return 0;
        }

        wc.key_pattern = key_pattern == "sequential" ? KeyPattern::Sequential : KeyPattern::Random;
        wc.key_order = key_order == "sorted" ? KeyOrder::Sorted : KeyOrder::Random;

        if (storage_engine == "none") {
            if (out.empty()) {
                std::cerr << "--storage-engine none needs --out <file>\n";
                return 2;
            }
            write_workload(wc, out);
            std::cerr << "wrote workload to " << out << '\n';
            return 0;
        }

        const EngineKind kind =
            storage_engine == "VIPHashing" ? EngineKind::Vip : EngineKind::Default;
        RunOptions options;
        options.batch_size = batch_size;
        options.experiment_label = "cli";

        RunResult run;
        if (!workload_file.empty())
            run = run_replay(read_workload(workload_file), kind, options);
        else
            run = run_workload(wc, kind, options);
        write_runs({run}, out, format);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
