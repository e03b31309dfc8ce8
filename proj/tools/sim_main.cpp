#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tmsim/config.hpp"
#include "tmsim/errors.hpp"
#include "tmsim/report.hpp"

using namespace tmsim;

namespace {

int dispatch(int argc, char** argv) {
    CLI::App app{"Cycle-approximate simulator of a tiled manycore with "
                 "reconfigurable L1 caches and a data-indirection prefetcher"};
    app.require_subcommand(1);

    // sim run <config>
    std::string run_config;
    std::uint32_t parallel = 1;
    bool json_mirror = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::uint64_t> max_cycles;
    std::optional<std::string> out_override;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", run_config, "JSON experiment config")->required();
    run->add_option("--out", [&](const CLI::results_t& r) { out_override = r[0]; return true; },
                    "Override the output CSV path");
    run->add_option("--parallel", parallel, "Worker threads for sweep points");
    run->add_flag("--json", json_mirror, "Also write a JSON mirror of the report");
    run->add_option("--seed", [&](const CLI::results_t& r) {
        seed_override = std::stoull(r[0]);
        return true;
    }, "Override the base seed");
    run->add_option("--max-cycles", [&](const CLI::results_t& r) {
        max_cycles = std::stoull(r[0]);
        return true;
    }, "Abort any single simulation after this many cycles");

    // sim preset <name> --graph <spec> --out <path>
    std::string preset_name, preset_graph, preset_kernel = "pagerank";
    std::string preset_out = "results.csv";
    std::uint32_t preset_iters = 0;
    auto* pre = app.add_subcommand("preset", "Run a canned design-space sweep");
    pre->add_option("name", preset_name,
                    "l1-sweep | l2-bank-sweep | mode-compare | tm-size-sweep | pf-ablation")
        ->required();
    pre->add_option("--graph", preset_graph,
                    "Graph spec, e.g. uniform:n=10000,deg=8,seed=1 or kron:scale=12,ef=8,seed=5")
        ->required();
    pre->add_option("--kernel", preset_kernel, "pagerank | bfs | sssp");
    pre->add_option("--iters", preset_iters, "PageRank iterations");
    pre->add_option("--out", preset_out, "Output CSV path");
    pre->add_option("--parallel", parallel, "Worker threads for sweep points");
    pre->add_flag("--json", json_mirror, "Also write a JSON mirror of the report");
    pre->add_option("--seed", [&](const CLI::results_t& r) {
        seed_override = std::stoull(r[0]);
        return true;
    }, "Override the base seed");
    pre->add_option("--max-cycles", [&](const CLI::results_t& r) {
        max_cycles = std::stoull(r[0]);
        return true;
    }, "Abort any single simulation after this many cycles");

    // sim trace-dump <config> --out <path>
    std::string trace_config, trace_out = "trace.bin";
    auto* td = app.add_subcommand("trace-dump",
                                  "Write the kernel's memory reference trace to a binary file");
    td->add_option("config", trace_config, "JSON experiment config")->required();
    td->add_option("--out", trace_out, "Output trace path");

    CLI11_PARSE(app, argc, argv);

    ExperimentOptions opts;
    opts.parallel = parallel;
    opts.json_mirror = json_mirror;
    opts.seed_override = seed_override;
    opts.max_cycles_override = max_cycles;
    opts.out_override = out_override;

    if (run->parsed()) {
        ExperimentSpec spec = parse_config(run_config);
        ExperimentResult res = run_experiment(spec, opts);
        std::size_t failed = 0;
        for (const auto& r : res.rows) failed += r.failed ? 1 : 0;
        std::cout << "wrote " << res.rows.size() << " rows to " << res.csv_path;
        if (failed) std::cout << " (" << failed << " failed)";
        std::cout << "\n";
        return res.exit_code;
    }
    if (pre->parsed()) {
        ExperimentSpec spec = preset(preset_name, parse_graph_string(preset_graph),
                                     kernel_from_name(preset_kernel));
        if (preset_iters > 0) spec.params.iters = preset_iters;
        spec.out_path = preset_out;
        ExperimentResult res = run_experiment(spec, opts);
        std::cout << "wrote " << res.rows.size() << " rows to " << res.csv_path << "\n";
        return res.exit_code;
    }
    if (td->parsed()) {
        ExperimentSpec spec = parse_config(trace_config);
        Graph g = build_graph(spec.graph);
        KernelRun kr = run_kernel(spec.kernel, g, spec.tm.num_gpes(), spec.params);
        dump_trace(kr, trace_out);
        std::cout << "wrote " << kr.total_refs() << " refs to " << trace_out << "\n";
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const SimAbort& e) {
        std::cerr << "simulation abort: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
