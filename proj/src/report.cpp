#include "tmsim/report.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>
#include <tuple>

#include "tmsim/errors.hpp"

namespace tmsim {

namespace {

// Fixed metric column set; rows leave undefined metrics empty.
const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> cols = {
        "total_cycles", "l1_demand_accesses", "l1_demand_hits", "l1_demand_misses",
        "l1_miss_rate", "l1_fills", "l1_replacements", "l1_prefetch_fills",
        "l1_prefetch_fills_used", "l1_prefetch_fills_evicted_unused",
        "prefetch_accuracy", "pf_candidates", "pf_issued", "pf_dropped",
        "pfhr_ops", "pfhr_squashes", "l2_accesses", "l2_hits", "l2_misses",
        "contention_ratio", "xbar_queued", "xbar_through", "hbm_blocks",
        "energy_proxy", "refs_retired", "cycles_stalled",
    };
    return cols;
}

std::string value_to_string(const ConfigValue& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_integer() || v.is_number_unsigned()) {
        std::ostringstream os;
        os << v.get<std::int64_t>();
        return os.str();
    }
    return format_number(v.get<double>());
}

struct RunKey {
    std::uint32_t num_gpes;
    std::uint32_t iters;
    double damping;
    std::uint32_t source;
    std::uint16_t load_gap, store_gap;
    KernelKind kernel;
    bool operator<(const RunKey& o) const {
        return std::tie(num_gpes, iters, damping, source, load_gap, store_gap, kernel) <
               std::tie(o.num_gpes, o.iters, o.damping, o.source, o.load_gap,
                        o.store_gap, o.kernel);
    }
};

struct PointConfig {
    TmConfig tm;
    KernelParams params;
    KernelKind kernel;
};

PointConfig materialize(const ExperimentSpec& spec, const ConfigPoint& point) {
    PointConfig pc{spec.tm, spec.params, spec.kernel};
    for (const auto& [key, value] : point)
        apply_config_key(pc.tm, pc.params, pc.kernel, key, value);
    pc.tm.validate();
    return pc;
}

bool config_value_equal(const ConfigValue& a, const ConfigValue& b) {
    if (a.is_boolean() || b.is_boolean()) {
        auto to_bool = [](const ConfigValue& v) -> std::optional<bool> {
            if (v.is_boolean()) return v.get<bool>();
            if (v.is_number_integer() || v.is_number_unsigned())
                return v.get<std::int64_t>() != 0;
            return std::nullopt;
        };
        auto ab = to_bool(a), bb = to_bool(b);
        return ab && bb && *ab == *bb;
    }
    if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
    return a == b;
}

bool matches_baseline(const ExperimentSpec& spec, const PointConfig& pc) {
    for (const auto& [key, value] : spec.baseline)
        if (!config_value_equal(get_config_value(pc.tm, pc.params, pc.kernel, key),
                                value))
            return false;
    return true;
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string render_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << "experiment,point_index,repetition,seed";
    for (const std::string& k : config_key_order()) os << ',' << k;
    for (const std::string& k : metric_columns()) os << ',' << k;
    os << ",speedup,status\n";
    for (const ReportRow& r : rows) {
        // experiment name is stored as the first config col pair ("__name")
        os << r.config_cols.front().second << ',' << r.point_index << ','
           << r.repetition << ',' << r.seed;
        for (std::size_t i = 1; i < r.config_cols.size(); ++i)
            os << ',' << r.config_cols[i].second;
        for (const std::string& k : metric_columns()) {
            os << ',';
            if (k == "total_cycles") {
                os << r.total_cycles;
            } else {
                auto it = r.metrics.find(k);
                if (it != r.metrics.end()) os << format_number(it->second);
            }
        }
        os << ',';
        if (r.speedup) os << format_number(*r.speedup);
        os << ',' << (r.failed ? "failed" : "ok") << '\n';
    }
    return os.str();
}

std::string render_json(const std::vector<ReportRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ReportRow& r : rows) {
        nlohmann::json o;
        o["experiment"] = r.config_cols.front().second;
        o["point_index"] = r.point_index;
        o["repetition"] = r.repetition;
        o["seed"] = r.seed;
        for (std::size_t i = 1; i < r.config_cols.size(); ++i)
            o[r.config_cols[i].first] = r.config_cols[i].second;
        for (const auto& [k, v] : r.metrics) o[k] = v;
        o["total_cycles"] = r.total_cycles;
        if (r.speedup) o["speedup"] = *r.speedup;
        o["status"] = r.failed ? "failed" : "ok";
        if (r.failed) o["error"] = r.error;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentSpec& spec_in,
                                const ExperimentOptions& opts) {
    ExperimentSpec spec = spec_in;
    if (opts.seed_override) spec.seed = *opts.seed_override;
    if (opts.max_cycles_override) spec.tm.max_cycles = *opts.max_cycles_override;
    if (opts.out_override) spec.out_path = *opts.out_override;

    const Graph graph = build_graph(spec.graph);
    const std::vector<ConfigPoint> points = enumerate_points(spec);

    // Materialize every point up front: validation errors surface before any
    // simulation runs, and kernel runs can be shared across points.
    std::vector<PointConfig> configs;
    configs.reserve(points.size());
    for (const ConfigPoint& p : points) configs.push_back(materialize(spec, p));

    std::map<RunKey, std::shared_ptr<const KernelRun>> runs;
    for (const PointConfig& pc : configs) {
        RunKey key{pc.tm.num_gpes(), pc.params.iters, pc.params.damping,
                   pc.params.source, pc.params.load_gap, pc.params.store_gap,
                   pc.kernel};
        if (!runs.count(key))
            runs[key] = std::make_shared<const KernelRun>(
                run_kernel(pc.kernel, graph, pc.tm.num_gpes(), pc.params));
    }

    const std::size_t total_jobs = points.size() * spec.repetitions;
    std::vector<ReportRow> rows(total_jobs);

    auto run_job = [&](std::size_t job) {
        const std::uint32_t point = static_cast<std::uint32_t>(job / spec.repetitions);
        const std::uint32_t rep = static_cast<std::uint32_t>(job % spec.repetitions);
        const PointConfig& pc = configs[point];
        ReportRow& row = rows[job];
        row.point_index = point;
        row.repetition = rep;
        row.seed = spec.seed + static_cast<std::uint64_t>(point) * 10007 + rep;

        row.config_cols.emplace_back("__name", spec.name);
        for (const std::string& k : config_key_order())
            row.config_cols.emplace_back(
                k, value_to_string(get_config_value(pc.tm, pc.params, pc.kernel, k)));

        TmConfig tm = pc.tm;
        tm.seed = row.seed;
        RunKey key{tm.num_gpes(), pc.params.iters, pc.params.damping, pc.params.source,
                   pc.params.load_gap, pc.params.store_gap, pc.kernel};
        try {
            SimResult res = run_simulation(*runs.at(key), tm);
            row.total_cycles = res.total_cycles;
            row.metrics = stats_to_fields(res.stats);
        } catch (const SimAbort& e) {
            row.failed = true;
            row.error = e.what();
        }
    };

    const std::uint32_t workers =
        std::max<std::uint32_t>(1, std::min<std::uint32_t>(opts.parallel,
                                                           static_cast<std::uint32_t>(total_jobs)));
    if (workers == 1) {
        for (std::size_t j = 0; j < total_jobs; ++j) run_job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::uint32_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t j = next.fetch_add(1);
                    if (j >= total_jobs) return;
                    run_job(j);
                }
            });
        for (auto& t : pool) t.join();
    }

    // Baseline-normalized speedup per repetition.
    if (!spec.baseline.empty()) {
        std::optional<std::uint32_t> base_point;
        for (std::uint32_t p = 0; p < configs.size(); ++p)
            if (matches_baseline(spec, configs[p])) {
                base_point = p;
                break;
            }
        if (!base_point)
            throw ValidationError("baseline does not match any sweep point");
        for (std::size_t job = 0; job < total_jobs; ++job) {
            const std::uint32_t rep = static_cast<std::uint32_t>(job % spec.repetitions);
            const ReportRow& base = rows[*base_point * spec.repetitions + rep];
            ReportRow& row = rows[job];
            if (!row.failed && !base.failed && row.total_cycles > 0)
                row.speedup = static_cast<double>(base.total_cycles) /
                              static_cast<double>(row.total_cycles);
        }
    }

    ExperimentResult result;
    result.rows = std::move(rows);
    result.csv_path = spec.out_path;
    {
        std::ofstream out(spec.out_path);
        if (!out) throw ValidationError("cannot write report: " + spec.out_path);
        out << render_csv(result.rows);
    }
    if (opts.json_mirror) {
        std::string jpath = spec.out_path;
        const auto dot = jpath.rfind('.');
        jpath = (dot == std::string::npos ? jpath : jpath.substr(0, dot)) + ".json";
        std::ofstream out(jpath);
        if (!out) throw ValidationError("cannot write report: " + jpath);
        out << render_json(result.rows);
    }
    for (const ReportRow& r : result.rows)
        if (r.failed) result.exit_code = 2;
    return result;
}

} // namespace tmsim
