#pragma once
#include <optional>
#include <string>
#include <vector>

#include "tmsim/config.hpp"

namespace tmsim {

struct ReportRow {
    std::uint32_t point_index = 0;
    std::uint32_t repetition = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config_cols;  // key order fixed
    std::map<std::string, double> metrics;
    std::uint64_t total_cycles = 0;
    std::optional<double> speedup;  // vs the named baseline point
    bool failed = false;
    std::string error;
};

struct ExperimentOptions {
    std::uint32_t parallel = 1;
    bool json_mirror = false;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::uint64_t> max_cycles_override;
    std::optional<std::string> out_override;
};

struct ExperimentResult {
    std::vector<ReportRow> rows;
    std::string csv_path;
    int exit_code = 0;  // 0 ok, 2 when any point aborted
};

// Executes every config point x repetition (seed = base + point*10007 + rep),
// writes one CSV row each in deterministic order, plus a JSON mirror when
// requested. Aborted simulations mark their row failed and the exit code.
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const ExperimentOptions& opts = {});

// Row serialization used by run_experiment; exposed for determinism tests.
std::string render_csv(const std::vector<ReportRow>& rows);
std::string render_json(const std::vector<ReportRow>& rows);

std::string format_number(double v);

} // namespace tmsim
