#pragma once
#include <cstdint>
#include <vector>

#include "tmsim/errors.hpp"

namespace tmsim {

using Cycle = std::uint64_t;
using BlockAddr = std::uint64_t;  // address / block_bytes

enum class CacheMode : std::uint8_t { Private, Shared };

struct CacheConfig {
    std::uint32_t size_bytes = 16 * 1024;  // per bank
    std::uint32_t assoc = 4;
    std::uint32_t block_bytes = 64;
    std::uint32_t mshr_count = 8;
    std::uint32_t ports = 1;

    std::uint32_t num_sets() const { return size_bytes / (assoc * block_bytes); }
    void validate(const char* what) const;
};

// Bank selection for shared caches: block index modulo bank count.
inline std::uint32_t color(std::uint64_t address, std::uint32_t block_bytes,
                           std::uint32_t num_banks) {
    return static_cast<std::uint32_t>((address / block_bytes) % num_banks);
}

struct CacheBankStats {
    // Demand side only; prefetch probes are counted separately.
    std::uint64_t accesses = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;        // includes MSHR merges
    std::uint64_t mshr_allocs = 0;   // post-merge miss count == expected fills
    std::uint64_t fills = 0;
    std::uint64_t replacements = 0;  // valid victim evicted
    std::uint64_t writebacks = 0;
    std::uint64_t prefetch_fills = 0;
    std::uint64_t prefetch_fills_used = 0;
    std::uint64_t prefetch_fills_evicted_unused = 0;
    std::uint64_t prefetch_fills_wrong_bank = 0;  // shared mode diagnostics
    std::uint64_t pf_probes = 0;     // prefetch lookups
    std::uint64_t blocked_mshr = 0;  // demand attempts refused for MSHR space
    std::uint64_t wb_in = 0;         // incoming writeback packets (L2 side)
};

enum class AccessOutcome : std::uint8_t { Hit, MissAllocated, MissMerged, BlockedMshr };

struct FillResult {
    bool evicted_valid = false;
    bool evicted_dirty = false;
    BlockAddr evicted_block = 0;
    std::vector<std::uint32_t> load_waiters;  // gpe ids to wake
    bool was_prefetch = false;                // first requestor was a prefetch
};

// One set-associative, non-coherent, write-allocate/write-back cache bank
// with true-LRU replacement and a small MSHR file. The bank knows nothing of
// timing; the cycle driver owns ports and scheduling.
class CacheBank {
public:
    CacheBank() = default;
    // index_stride: bank-interleave factor of the address space this bank
    // sees (number of banks sharing by coloring); the set index is taken
    // above the interleave bits so sliced banks still use every set.
    CacheBank(const CacheConfig& cfg, std::uint32_t bank_id,
              std::uint32_t index_stride = 1);

    // Only legal with no valid lines (mode reconfiguration).
    void set_index_stride(std::uint32_t stride);

    // Demand access. On MissAllocated the caller must forward a request
    // packet toward the next level. Stores are recorded on the MSHR and
    // applied at fill time.
    AccessOutcome access_demand(BlockAddr block, bool is_store, std::uint32_t gpe,
                                Cycle cycle);

    // Prefetch probe. Outcomes: Hit = block resident (redundant), MissMerged =
    // in-flight request exists, MissAllocated = new MSHR (forward a packet),
    // BlockedMshr = no MSHR free.
    AccessOutcome probe_prefetch(BlockAddr block, Cycle cycle);

    bool mshr_exists(BlockAddr block) const { return find_mshr(block) >= 0; }
    bool resident(BlockAddr block) const;
    std::uint32_t live_mshrs() const;

    // Incoming writeback (no-allocate): marks the line dirty when resident;
    // returns false when the data must continue to the next level.
    bool writeback_probe(BlockAddr block);

    // Debug sweep: calls fn(block) for every resident line.
    template <typename Fn>
    void for_each_resident(Fn&& fn) const {
        for (const Line& l : lines_)
            if (l.valid) fn(l.tag);
    }

    // Installs a fill. Returns the waiters to wake plus eviction info; the
    // caller emits any writeback packet.
    FillResult fill(BlockAddr block, Cycle cycle);

    // Demand touch bookkeeping for a resident line (prefetch-used tracking).
    // Called internally by access_demand; exposed for fills that wake demand
    // waiters (the line arrives already-demanded).
    void invalidate_all(std::vector<BlockAddr>* dirty_out);

    const CacheConfig& config() const { return cfg_; }
    CacheBankStats stats;

private:
    struct Line {
        BlockAddr tag = 0;  // full block address; sets are indexed separately
        bool valid = false;
        bool dirty = false;
        bool prefetch_bit = false;
        bool used_bit = false;
        std::uint64_t lru_stamp = 0;
    };
    struct Mshr {
        bool valid = false;
        BlockAddr block = 0;
        bool is_prefetch = false;  // first requestor
        bool has_store = false;
        std::vector<std::uint32_t> load_waiters;
        Cycle alloc_cycle = 0;
    };

    int find_line(BlockAddr block) const;
    int find_mshr(BlockAddr block) const;
    std::uint32_t set_of(BlockAddr block) const {
        return static_cast<std::uint32_t>((block / index_stride_) % cfg_.num_sets());
    }
    // Victim way within the (full) set: invalid first, else lowest LRU stamp.
    std::uint32_t victim_way(std::uint32_t set) const;
    void touch(Line& line) { line.lru_stamp = ++lru_clock_; }

    CacheConfig cfg_;
    std::uint32_t bank_id_ = 0;
    std::uint32_t index_stride_ = 1;
    std::vector<Line> lines_;  // sets * ways
    std::vector<Mshr> mshrs_;
    std::uint64_t lru_clock_ = 0;
};

} // namespace tmsim
