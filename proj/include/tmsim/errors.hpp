#pragma once
#include <stdexcept>
#include <string>

namespace tmsim {

// Bad user input: malformed config, infeasible generator parameters, ...
// CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; message carries the offending line number.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Simulation gave up (livelock guard, max-cycles guard). CLI exit code 2.
struct SimAbort : std::runtime_error {
    explicit SimAbort(const std::string& msg) : std::runtime_error(msg) {}
};

// Metric requested on a run that produced no denominator events.
struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace tmsim
