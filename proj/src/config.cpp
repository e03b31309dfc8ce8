#include "tmsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tmsim/errors.hpp"

namespace tmsim {

namespace {

using json = nlohmann::json;

std::uint64_t as_uint(const json& v, const std::string& key) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ValidationError("config key '" + key + "' expects an integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        throw ValidationError("config key '" + key + "' must be nonnegative");
    return v.get<std::uint64_t>();
}

double as_real(const json& v, const std::string& key) {
    if (!v.is_number())
        throw ValidationError("config key '" + key + "' expects a number");
    return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer() || v.is_number_unsigned()) return as_uint(v, key) != 0;
    throw ValidationError("config key '" + key + "' expects a boolean");
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string())
        throw ValidationError("config key '" + key + "' expects a string");
    return v.get<std::string>();
}

} // namespace

const std::vector<std::string>& config_key_order() {
    static const std::vector<std::string> keys = {
        "kernel", "damping", "iters", "source", "load_gap", "store_gap",
        "tiles", "gpes_per_tile", "cache_mode",
        "l1_size_kb_per_bank", "l1_total_kb", "l1_assoc", "l1_mshrs", "block_bytes",
        "l2_banks_per_tile", "l2_total_kb", "l2_assoc", "l2_mshrs",
        "hbm_channels", "hbm_lat_min", "hbm_lat_max", "hbm_occupancy",
        "xbar_window_cycles",
        "pf_enabled", "pf_distance", "pf_max_range", "pf_inbox_depth",
        "pf_filter_entries", "pfhr_entries_per_gpe", "ablate_handshake",
        "ablate_fused_pfhr", "squash_on_catchup", "max_cycles",
    };
    return keys;
}

void apply_config_key(TmConfig& tm, KernelParams& params, KernelKind& kernel,
                      const std::string& key, const ConfigValue& v) {
    auto u32 = [&] { return static_cast<std::uint32_t>(as_uint(v, key)); };
    if (key == "kernel") kernel = kernel_from_name(as_string(v, key));
    else if (key == "damping") params.damping = as_real(v, key);
    else if (key == "iters") params.iters = u32();
    else if (key == "source") params.source = u32();
    else if (key == "load_gap") params.load_gap = static_cast<std::uint16_t>(as_uint(v, key));
    else if (key == "store_gap") params.store_gap = static_cast<std::uint16_t>(as_uint(v, key));
    else if (key == "tiles") tm.tiles = u32();
    else if (key == "gpes_per_tile") tm.gpes_per_tile = u32();
    else if (key == "cache_mode") {
        const std::string m = as_string(v, key);
        if (m == "shared") tm.cache_mode = CacheMode::Shared;
        else if (m == "private") tm.cache_mode = CacheMode::Private;
        else throw ValidationError("cache_mode must be 'private' or 'shared'");
    }
    else if (key == "l1_size_kb_per_bank") tm.l1_size_kb_per_bank = u32();
    else if (key == "l1_total_kb") tm.l1_total_kb = u32();
    else if (key == "l1_assoc") tm.l1_assoc = u32();
    else if (key == "l1_mshrs") tm.l1_mshrs = u32();
    else if (key == "block_bytes") tm.block_bytes = u32();
    else if (key == "l2_banks_per_tile") tm.l2_banks_per_tile = u32();
    else if (key == "l2_total_kb") tm.l2_total_kb = u32();
    else if (key == "l2_assoc") tm.l2_assoc = u32();
    else if (key == "l2_mshrs") tm.l2_mshrs = u32();
    else if (key == "hbm_channels") tm.hbm_channels = u32();
    else if (key == "hbm_lat_min") tm.hbm_lat_min = u32();
    else if (key == "hbm_lat_max") tm.hbm_lat_max = u32();
    else if (key == "hbm_occupancy") tm.hbm_occupancy = u32();
    else if (key == "xbar_window_cycles") tm.xbar_window_cycles = u32();
    else if (key == "pf_enabled") tm.pf.enabled = as_bool(v, key);
    else if (key == "pf_distance") tm.pf.distance = u32();
    else if (key == "pf_max_range") tm.pf.max_range = u32();
    else if (key == "pf_inbox_depth") tm.pf.inbox_depth = u32();
    else if (key == "pf_filter_entries") tm.pf.filter_entries = u32();
    else if (key == "pfhr_entries_per_gpe") tm.pf.entries_per_gpe = u32();
    else if (key == "ablate_handshake") tm.pf.ablate_handshake = as_bool(v, key);
    else if (key == "ablate_fused_pfhr") tm.pf.ablate_fused_pfhr = as_bool(v, key);
    else if (key == "squash_on_catchup") tm.pf.squash_on_catchup = as_bool(v, key);
    else if (key == "max_cycles") tm.max_cycles = as_uint(v, key);
    else throw ValidationError("unknown config key '" + key + "'");
}

ConfigValue get_config_value(const TmConfig& tm, const KernelParams& params,
                             KernelKind kernel, const std::string& key) {
    if (key == "kernel") return kernel_name(kernel);
    if (key == "damping") return params.damping;
    if (key == "iters") return params.iters;
    if (key == "source") return params.source;
    if (key == "load_gap") return params.load_gap;
    if (key == "store_gap") return params.store_gap;
    if (key == "tiles") return tm.tiles;
    if (key == "gpes_per_tile") return tm.gpes_per_tile;
    if (key == "cache_mode")
        return tm.cache_mode == CacheMode::Shared ? "shared" : "private";
    if (key == "l1_size_kb_per_bank") return tm.l1_size_kb_per_bank;
    if (key == "l1_total_kb") return tm.l1_total_kb;
    if (key == "l1_assoc") return tm.l1_assoc;
    if (key == "l1_mshrs") return tm.l1_mshrs;
    if (key == "block_bytes") return tm.block_bytes;
    if (key == "l2_banks_per_tile") return tm.l2_banks_per_tile;
    if (key == "l2_total_kb") return tm.l2_total_kb;
    if (key == "l2_assoc") return tm.l2_assoc;
    if (key == "l2_mshrs") return tm.l2_mshrs;
    if (key == "hbm_channels") return tm.hbm_channels;
    if (key == "hbm_lat_min") return tm.hbm_lat_min;
    if (key == "hbm_lat_max") return tm.hbm_lat_max;
    if (key == "hbm_occupancy") return tm.hbm_occupancy;
    if (key == "xbar_window_cycles") return tm.xbar_window_cycles;
    if (key == "pf_enabled") return tm.pf.enabled;
    if (key == "pf_distance") return tm.pf.distance;
    if (key == "pf_max_range") return tm.pf.max_range;
    if (key == "pf_inbox_depth") return tm.pf.inbox_depth;
    if (key == "pf_filter_entries") return tm.pf.filter_entries;
    if (key == "pfhr_entries_per_gpe") return tm.pf.entries_per_gpe;
    if (key == "ablate_handshake") return tm.pf.ablate_handshake;
    if (key == "ablate_fused_pfhr") return tm.pf.ablate_fused_pfhr;
    if (key == "squash_on_catchup") return tm.pf.squash_on_catchup;
    if (key == "max_cycles") return tm.max_cycles;
    throw ValidationError("unknown config key '" + key + "'");
}

GraphSpec parse_graph_spec_json(const json& j) {
    GraphSpec g;
    if (j.is_string()) {
        g.kind = GraphSpec::Kind::EdgeListFile;
        g.path = j.get<std::string>();
        return g;
    }
    if (!j.is_object()) throw ValidationError("graph spec must be an object or path");
    const std::string kind = j.contains("kind") ? as_string(j.at("kind"), "graph.kind")
                                                : std::string("file");
    static const std::vector<std::string> known = {"kind",  "path", "weighted", "n",
                                                   "avg_degree", "scale",
                                                   "edge_factor", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ValidationError("unknown config key 'graph." + it.key() + "'");
    if (kind == "file") {
        g.kind = GraphSpec::Kind::EdgeListFile;
        g.path = as_string(j.at("path"), "graph.path");
        if (j.contains("weighted")) g.weighted = as_bool(j.at("weighted"), "graph.weighted");
    } else if (kind == "uniform") {
        g.kind = GraphSpec::Kind::UniformRandom;
        g.n = as_uint(j.at("n"), "graph.n");
        g.avg_degree = as_real(j.at("avg_degree"), "graph.avg_degree");
        if (j.contains("seed")) g.seed = as_uint(j.at("seed"), "graph.seed");
    } else if (kind == "kronecker" || kind == "kron") {
        g.kind = GraphSpec::Kind::Kronecker;
        g.scale = static_cast<std::uint32_t>(as_uint(j.at("scale"), "graph.scale"));
        g.edge_factor =
            static_cast<std::uint32_t>(as_uint(j.at("edge_factor"), "graph.edge_factor"));
        if (j.contains("seed")) g.seed = as_uint(j.at("seed"), "graph.seed");
    } else {
        throw ValidationError("graph.kind must be file|uniform|kronecker");
    }
    return g;
}

GraphSpec parse_graph_string(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ValidationError("graph spec: expected kind:args, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);

    if (kind == "file") {
        GraphSpec g;
        g.kind = GraphSpec::Kind::EdgeListFile;
        std::string path = rest;
        const auto comma = rest.rfind(",weighted");
        if (comma != std::string::npos && comma + 9 == rest.size()) {
            path = rest.substr(0, comma);
            g.weighted = true;
        }
        g.path = path;
        return g;
    }

    std::map<std::string, std::string> kv;
    std::stringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw ValidationError("graph spec: expected key=value, got '" + part + "'");
        kv[part.substr(0, eq)] = part.substr(eq + 1);
    }
    auto need = [&](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end())
            throw ValidationError("graph spec: missing '" + k + "'");
        return it->second;
    };

    GraphSpec g;
    try {
        if (kind == "uniform") {
            g.kind = GraphSpec::Kind::UniformRandom;
            g.n = std::stoull(need("n"));
            g.avg_degree = std::stod(kv.count("deg") ? need("deg") : need("avg_degree"));
            if (kv.count("seed")) g.seed = std::stoull(kv["seed"]);
        } else if (kind == "kron" || kind == "kronecker") {
            g.kind = GraphSpec::Kind::Kronecker;
            g.scale = static_cast<std::uint32_t>(std::stoul(need("scale")));
            g.edge_factor = static_cast<std::uint32_t>(
                std::stoul(kv.count("ef") ? need("ef") : need("edge_factor")));
            if (kv.count("seed")) g.seed = std::stoull(kv["seed"]);
        } else {
            throw ValidationError("graph spec: unknown kind '" + kind + "'");
        }
    } catch (const std::invalid_argument&) {
        throw ValidationError("graph spec: malformed number in '" + text + "'");
    }
    return g;
}

ExperimentSpec parse_config_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config root must be an object");
    static const std::vector<std::string> top_keys = {
        "name", "graph", "kernel", "damping", "iters", "source", "load_gap",
        "store_gap", "tm", "sweep", "baseline", "repetitions", "seed", "out"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(top_keys.begin(), top_keys.end(), it.key()) == top_keys.end())
            throw ValidationError("unknown config key '" + it.key() + "'");

    ExperimentSpec spec;
    if (j.contains("name")) spec.name = as_string(j.at("name"), "name");
    if (!j.contains("graph")) throw ValidationError("config: missing graph");
    spec.graph = parse_graph_spec_json(j.at("graph"));

    for (const char* k : {"kernel", "damping", "iters", "source", "load_gap",
                          "store_gap"})
        if (j.contains(k))
            apply_config_key(spec.tm, spec.params, spec.kernel, k, j.at(k));

    if (j.contains("tm")) {
        const json& tm = j.at("tm");
        if (!tm.is_object()) throw ValidationError("config: tm must be an object");
        for (auto it = tm.begin(); it != tm.end(); ++it)
            apply_config_key(spec.tm, spec.params, spec.kernel, it.key(), it.value());
    }

    if (j.contains("sweep")) {
        const json& sw = j.at("sweep");
        if (!sw.is_array()) throw ValidationError("config: sweep must be an array");
        for (const json& entry : sw) {
            if (!entry.is_object() || !entry.contains("key") || !entry.contains("values"))
                throw ValidationError("config: sweep entries need {key, values}");
            const std::string key = as_string(entry.at("key"), "sweep.key");
            // validate the key name now; value types are checked at apply time
            get_config_value(spec.tm, spec.params, spec.kernel, key);
            std::vector<ConfigValue> values;
            for (const json& v : entry.at("values")) values.push_back(v);
            if (values.empty())
                throw ValidationError("config: sweep '" + key + "' has no values");
            spec.sweep.emplace_back(key, std::move(values));
        }
    }

    if (j.contains("baseline")) {
        const json& b = j.at("baseline");
        if (!b.is_object()) throw ValidationError("config: baseline must be an object");
        for (auto it = b.begin(); it != b.end(); ++it) {
            get_config_value(spec.tm, spec.params, spec.kernel, it.key());
            spec.baseline[it.key()] = it.value();
        }
    }

    if (j.contains("repetitions")) {
        spec.repetitions = static_cast<std::uint32_t>(as_uint(j.at("repetitions"), "repetitions"));
        if (spec.repetitions < 1) throw ValidationError("repetitions must be >= 1");
    }
    if (j.contains("seed")) spec.seed = as_uint(j.at("seed"), "seed");
    if (j.contains("out")) spec.out_path = as_string(j.at("out"), "out");

    // surface obvious config errors before any simulation starts
    spec.tm.validate();
    return spec;
}

ExperimentSpec parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path + ": " + e.what());
    }
    return parse_config_json(j);
}

std::vector<ConfigPoint> enumerate_points(const ExperimentSpec& spec) {
    if (!spec.explicit_points.empty()) return spec.explicit_points;
    std::vector<ConfigPoint> points{ConfigPoint{}};
    for (const auto& [key, values] : spec.sweep) {
        std::vector<ConfigPoint> next;
        next.reserve(points.size() * values.size());
        for (const ConfigPoint& p : points)
            for (const ConfigValue& v : values) {
                ConfigPoint q = p;
                q[key] = v;
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

ExperimentSpec preset(const std::string& name, const GraphSpec& graph,
                      KernelKind kernel) {
    ExperimentSpec spec;
    spec.name = name;
    spec.graph = graph;
    spec.kernel = kernel;

    auto points_from = [](const std::vector<std::vector<std::pair<std::string, ConfigValue>>>& raw) {
        std::vector<ConfigPoint> out;
        for (const auto& entries : raw) {
            ConfigPoint p;
            for (const auto& [k, v] : entries) p[k] = v;
            out.push_back(std::move(p));
        }
        return out;
    };

    if (name == "l1-sweep") {
        spec.sweep = {{"pf_enabled", {false, true}},
                      {"l1_size_kb_per_bank", {4, 8, 16, 32}}};
        spec.baseline = {{"l1_size_kb_per_bank", 4}, {"pf_enabled", false}};
    } else if (name == "l2-bank-sweep") {
        spec.sweep = {{"pf_enabled", {false, true}},
                      {"l2_banks_per_tile", {1, 2, 4, 8}}};
        spec.baseline = {{"l2_banks_per_tile", 1}, {"pf_enabled", false}};
    } else if (name == "mode-compare") {
        spec.sweep = {{"pf_enabled", {false, true}},
                      {"cache_mode", {"private", "shared"}}};
        spec.baseline = {{"cache_mode", "private"}, {"pf_enabled", false}};
    } else if (name == "tm-size-sweep") {
        // Total L1/L2 capacity fixed while the machine scales 4x2 -> 4x16.
        spec.tm.l1_total_kb = 1024;
        spec.sweep = {{"pf_enabled", {false, true}},
                      {"gpes_per_tile", {2, 4, 8, 16}}};
        spec.baseline = {{"gpes_per_tile", 2}, {"pf_enabled", false}};
    } else if (name == "pf-ablation") {
        spec.explicit_points = points_from({
            {{"pf_enabled", false}},
            {{"pf_enabled", true}, {"ablate_handshake", true}},
            {{"pf_enabled", true}, {"ablate_handshake", false}},
        });
        spec.baseline = {{"pf_enabled", false}};
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    return spec;
}

} // namespace tmsim
