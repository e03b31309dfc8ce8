#pragma once
#include <cstdint>
#include <vector>

#include "tmsim/cache.hpp"
#include "tmsim/event_log.hpp"
#include "tmsim/kernels.hpp"
#include "tmsim/prefetcher.hpp"
#include "tmsim/stats.hpp"

namespace tmsim {

// Platform configuration; defaults follow the reference machine: 4 tiles of
// 16 GPEs, one 16 kB 4-way L1 bank with 8 MSHRs per GPE, 64 B blocks, four
// L2 banks per tile at 64 kB total, HBM with 16 pseudo-channels at 80-150
// cycles. 1 GHz clock: cycles and nanoseconds coincide.
struct TmConfig {
    std::uint32_t tiles = 4;
    std::uint32_t gpes_per_tile = 16;
    CacheMode cache_mode = CacheMode::Shared;

    std::uint32_t l1_size_kb_per_bank = 16;
    std::uint32_t l1_total_kb = 0;  // nonzero: total L1 held fixed, per-bank derived
    std::uint32_t l1_assoc = 4;
    std::uint32_t l1_mshrs = 8;
    std::uint32_t block_bytes = 64;

    std::uint32_t l2_banks_per_tile = 4;
    std::uint32_t l2_total_kb = 64;  // primary; per-bank size is derived
    std::uint32_t l2_assoc = 4;
    std::uint32_t l2_mshrs = 8;

    std::uint32_t hbm_channels = 16;
    std::uint32_t hbm_lat_min = 80;
    std::uint32_t hbm_lat_max = 150;
    std::uint32_t hbm_occupancy = 8;

    std::uint32_t xbar_window_cycles = 1000;

    PfConfig pf;

    std::uint64_t seed = 1;
    std::uint64_t max_cycles = 2000000000ULL;

    std::uint32_t num_gpes() const { return tiles * gpes_per_tile; }
    std::uint32_t l1_banks_total() const { return tiles * gpes_per_tile; }
    std::uint32_t l2_banks_total() const { return tiles * l2_banks_per_tile; }
    CacheConfig l1_config() const;
    CacheConfig l2_config() const;
    void validate() const;
};

// One processing tile: an L1 bank per GPE plus the tile's prefetch engines.
// Mode switches happen only at phase boundaries with the hierarchy drained.
struct Tile {
    std::uint32_t tile_id = 0;
    CacheMode mode = CacheMode::Shared;
    std::vector<CacheBank> banks;
    TilePrefetcher pf;

    std::uint32_t live_mshrs() const;

    // Invalidates all L1 lines (dirty lines are flushed and counted), resets
    // the prefetcher state and fuses/splits the PFHR array to match.
    // Precondition: no outstanding MSHRs.
    void reconfigure(CacheMode new_mode);
};

struct SimResult {
    std::uint64_t total_cycles = 0;
    CycleStats stats;
    std::uint64_t refs_total = 0;
    std::uint64_t result_checksum = 0;  // kernel result echo
};

// Deterministic in (kr, cfg) including cfg.seed. Throws SimAbort on the
// max-cycles or livelock guards.
SimResult run_simulation(const KernelRun& kr, const TmConfig& cfg,
                         EventLog* log = nullptr);

struct BaselinePfResult {
    SimResult baseline;
    SimResult pf;
    double speedup = 1.0;  // baseline cycles / pf cycles
};

// Same seed, prefetcher off then on.
BaselinePfResult run_baseline_and_pf(const KernelRun& kr, const TmConfig& cfg);

// All cores resume on the cycle after the last arrival; no arrivals -> 0.
Cycle barrier_release_cycle(const std::vector<Cycle>& arrivals);

} // namespace tmsim
