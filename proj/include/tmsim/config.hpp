#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmsim/graph.hpp"
#include "tmsim/kernels.hpp"
#include "tmsim/sim.hpp"

namespace tmsim {

using ConfigValue = nlohmann::json;
using ConfigPoint = std::map<std::string, ConfigValue>;

// One experiment: a workload (graph + kernel), a platform config, and an
// optional sweep. Sweeps are either a cross product of (key, values) lists or
// an explicit point list (presets use the latter).
struct ExperimentSpec {
    std::string name = "experiment";
    GraphSpec graph;
    KernelKind kernel = KernelKind::PageRank;
    KernelParams params;
    TmConfig tm;
    std::vector<std::pair<std::string, std::vector<ConfigValue>>> sweep;
    std::vector<ConfigPoint> explicit_points;
    ConfigPoint baseline;  // empty: no speedup column
    std::uint32_t repetitions = 1;
    std::uint64_t seed = 1;
    std::string out_path = "results.csv";
};

// Flat JSON config file; unknown keys are an error naming the key.
ExperimentSpec parse_config(const std::string& path);
ExperimentSpec parse_config_json(const nlohmann::json& j);

// CLI graph mini-format:
//   uniform:n=10000,deg=8,seed=1
//   kron:scale=12,ef=8,seed=5
//   file:path/to/graph.el[,weighted]
GraphSpec parse_graph_string(const std::string& text);

// Canned design-space sweeps. Names: l1-sweep, l2-bank-sweep, mode-compare,
// tm-size-sweep, pf-ablation.
ExperimentSpec preset(const std::string& name, const GraphSpec& graph,
                      KernelKind kernel);

// Cross product of the sweep lists (or the explicit points); a sweepless spec
// yields one empty point.
std::vector<ConfigPoint> enumerate_points(const ExperimentSpec& spec);

// Applies one override to (tm, params, kernel); throws ValidationError for
// unknown keys or type mismatches.
void apply_config_key(TmConfig& tm, KernelParams& params, KernelKind& kernel,
                      const std::string& key, const ConfigValue& value);

// Effective value of a config key, for baseline matching and report columns.
ConfigValue get_config_value(const TmConfig& tm, const KernelParams& params,
                             KernelKind kernel, const std::string& key);

// Stable column order for reports.
const std::vector<std::string>& config_key_order();

} // namespace tmsim
