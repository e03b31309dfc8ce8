#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tmsim/cache.hpp"
#include "tmsim/prefetcher.hpp"
#include "tmsim/xbar.hpp"

namespace tmsim {

struct CoreStats {
    std::uint64_t refs_retired = 0;
    std::uint64_t cycles_stalled = 0;
};

// All counters for one run, owned by the simulation and read-only afterward.
struct CycleStats {
    std::vector<CacheBankStats> l1;     // global bank index
    std::vector<CacheBankStats> l2;
    std::vector<PfEngineStats> pf;      // global engine index
    std::vector<PfhrStats> pfhr;        // per tile
    std::vector<CoreStats> cores;
    std::uint64_t xbar_queued = 0;
    std::uint64_t xbar_through = 0;
    std::uint64_t xbar_blocked = 0;
    std::vector<XbarWindow> xbar_windows;
    std::uint64_t hbm_blocks = 0;

    std::uint64_t l1_accesses() const;
    std::uint64_t l1_hits() const;
    std::uint64_t l1_misses() const;
    std::uint64_t l1_fills() const;
    std::uint64_t l1_mshr_allocs() const;
    std::uint64_t l1_replacements() const;
    std::uint64_t l1_pf_probes() const;
    std::uint64_t prefetch_fills() const;
    std::uint64_t prefetch_fills_used() const;
    std::uint64_t prefetch_fills_evicted_unused() const;
    std::uint64_t prefetch_fills_wrong_bank() const;
    std::uint64_t l2_accesses() const;
    std::uint64_t l2_hits() const;
    std::uint64_t l2_misses() const;
    std::uint64_t pf_candidates() const;
    std::uint64_t pf_issued() const;
    std::uint64_t pf_dropped() const;
    std::uint64_t pfhr_ops() const;
    std::uint64_t refs_retired() const;
    std::uint64_t cycles_stalled() const;
    std::uint64_t squashes() const;
    std::uint64_t cross_gpe_squashes() const;
};

// Demand miss rate over all L1 banks; prefetch probes are not accesses.
double miss_rate(const CycleStats& s);

// Fraction of prefetch fills touched by a demand access before eviction.
double prefetch_accuracy(const CycleStats& s);

// Queued / through, computed per window of W cycles and averaged over
// windows that saw traffic.
double contention_ratio(const CycleStats& s);

// Relative-comparison energy proxy: weighted event counts with fixed weights
//   1.0 * L1 accesses (demand + prefetch probes)
//   4.0 * L2 accesses (reads + writebacks)
// 100.0 * HBM block transfers
//   0.5 * PF operations (element candidates + granted PFHR accesses)
// Only ratios between configurations are meaningful.
double energy_proxy(const CycleStats& s);

constexpr double kEnergyWeightL1 = 1.0;
constexpr double kEnergyWeightL2 = 4.0;
constexpr double kEnergyWeightHbm = 100.0;
constexpr double kEnergyWeightPf = 0.5;

// Conservation suite: hits + misses == accesses per bank, fills == MSHR
// allocations, retired refs == expected, rates within range. Throws
// MetricError with a description on the first violation.
void check_conservation(const CycleStats& s, std::uint64_t expected_refs);

// Flat serialization with stable field names (CSV columns / JSON keys).
// Undefined metrics (no prefetch fills, no crossbar traffic) are omitted.
std::map<std::string, double> stats_to_fields(const CycleStats& s);

} // namespace tmsim
