#pragma once
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "tmsim/cache.hpp"
#include "tmsim/dig.hpp"
#include "tmsim/event_log.hpp"

namespace tmsim {

struct PfConfig {
    bool enabled = false;
    std::uint32_t distance = 8;       // trigger lead, in elements
    std::uint32_t max_range = 64;     // cap per ranged expansion, in elements
    std::uint32_t inbox_depth = 16;   // handed-off candidates per engine
    std::uint32_t entries_per_gpe = 8;
    bool ablate_handshake = false;    // issue at the generating engine's bank
    bool ablate_fused_pfhr = false;   // engines restricted to their own bank
    bool squash_on_catchup = false;   // demand touching an in-progress block
                                      // squashes the matching-GPE entry
    std::uint32_t max_chain_depth = 8;
    std::uint32_t filter_entries = 128;  // per-engine recent-candidate filter (0 = off)

    void validate() const {
        if (distance < 1) throw ValidationError("pf_distance must be >= 1");
        if (max_range < 1) throw ValidationError("pf_max_range must be >= 1");
        if (entries_per_gpe < 1) throw ValidationError("pfhr_entries_per_gpe must be >= 1");
    }
};

struct PfhrEntry {
    bool valid = false;
    bool in_flight = false;    // a memory request for issued_block is pending
    std::uint16_t gpe_id = 0;
    std::uint32_t node_id = 0;
    std::uint64_t elem_index = 0;  // next element to consume
    std::uint64_t range_end = 0;   // exclusive
    std::uint32_t chain_depth = 0;
    BlockAddr issued_block = 0;
    Cycle alloc_cycle = 0;
    std::uint32_t version = 0;     // bumped on every release; guards stale handles
};

struct EntryHandle {
    std::uint16_t bank = 0;
    std::uint16_t slot = 0;
    std::uint32_t version = 0;
};

struct PfhrStats {
    std::uint64_t allocs = 0;
    std::uint64_t alloc_fails = 0;
    std::uint64_t squashes = 0;
    std::uint64_t cross_gpe_squashes = 0;  // invariant: stays 0
    std::uint64_t retired = 0;
    std::uint64_t released = 0;            // dropped candidates returning slots
    std::uint64_t accesses = 0;            // granted bank operations
};

// Per-tile PFHR storage, banked one bank per PF engine with a single
// read/write port each. In fused mode every engine sees every bank; in split
// mode an engine sees only its own.
class FusedPfhrArray {
public:
    FusedPfhrArray() = default;
    FusedPfhrArray(std::uint32_t banks, std::uint32_t entries_per_bank);

    void set_fused(bool fused) { fused_ = fused; }
    bool fused() const { return fused_; }

    PfhrEntry& at(const EntryHandle& h) { return banks_[h.bank][h.slot]; }
    const PfhrEntry& at(const EntryHandle& h) const { return banks_[h.bank][h.slot]; }
    bool handle_valid(const EntryHandle& h) const {
        const PfhrEntry& e = banks_[h.bank][h.slot];
        return e.valid && e.version == h.version;
    }

    // Free slot visible to `engine`, own bank first.
    std::optional<EntryHandle> find_free(std::uint32_t engine) const;

    // Oldest valid entry with matching gpe_id among banks visible to
    // `engine`; entries of other GPEs are never candidates.
    std::optional<EntryHandle> squash_victim(std::uint32_t engine,
                                             std::uint16_t gpe_id) const;

    enum class ReleaseReason : std::uint8_t { Retired, Squashed, Dropped };

    // Invalidate + free a slot; bumps the slot version so outstanding handles
    // go stale. Squashes verify the GPE-ID rule.
    void release(const EntryHandle& h, ReleaseReason reason,
                 std::uint16_t squash_gpe = 0);

    // Live entry with the same (node, elem_index) visible to `engine`
    // (trigger refresh dedup).
    bool duplicate_exists(std::uint32_t engine, std::uint32_t node_id,
                          std::uint64_t elem_index) const;

    // Entries whose issued_block matches, searched across banks visible to
    // `engine`; returns handles grouped so one bank is touched per call site.
    std::vector<EntryHandle> match_block(std::uint32_t engine, BlockAddr block) const;

    void invalidate_all();
    std::uint32_t live_entries() const;
    std::uint32_t num_banks() const { return static_cast<std::uint32_t>(banks_.size()); }
    std::uint32_t bank_capacity() const { return entries_per_bank_; }

    PfhrStats stats;

private:
    friend class TilePrefetcher;
    std::vector<std::uint32_t> visible(std::uint32_t engine) const;

    std::vector<std::vector<PfhrEntry>> banks_;
    std::uint32_t entries_per_bank_ = 8;
    bool fused_ = false;
};

// Round-robin grant of PFHR banks: at most one engine per bank per cycle,
// priority rotating with the cycle index. Requests are (engine, bank) pairs.
// In split mode a foreign-bank request is an invariant breach.
std::vector<std::pair<std::uint32_t, std::uint32_t>> pfhr_arbitrate(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& requests,
    std::uint32_t num_banks, Cycle cycle, bool fused);

struct PfEngineStats {
    std::uint64_t candidates = 0;       // element-granular candidates
    std::uint64_t candidate_ops = 0;    // allocation attempts enqueued
    std::uint64_t issued = 0;           // prefetch requests entering the memory system
    std::uint64_t merged = 0;           // matched an in-flight miss
    std::uint64_t redundant_hit = 0;    // block resident; chain continued in place
    std::uint64_t drop_pfhr_alloc_fail = 0;
    std::uint64_t drop_refresh = 0;
    std::uint64_t drop_inbox_full = 0;
    std::uint64_t drop_clamped = 0;     // trigger target past node end
    std::uint64_t drop_bad_index = 0;   // loaded value indexes outside the node
    std::uint64_t drop_filtered = 0;    // recently requested block
    std::uint64_t drop_depth_cap = 0;
    std::uint64_t drop_alloc_queue_full = 0;
    std::uint64_t drop_stale = 0;       // issue item outlived its entry
    std::uint64_t drop_run_end = 0;
    std::uint64_t orphan_fills = 0;     // fill with no matching entry
    std::uint64_t catchup_squashes = 0;
    std::uint64_t pfhr_ops = 0;         // granted PFHR accesses by this engine
};

// Outcome of handing one prefetch request to the cache/bank layer.
enum class PfIssueResult : std::uint8_t {
    PortBusy,   // bank CPU-side port taken this cycle; retry
    Issued,     // MSHR allocated, packet on its way
    Merged,     // existing in-flight miss for the block
    Redundant,  // block resident
    MshrFull,   // no MSHR; retry
};

// Indirection-chain prefetching for one tile: a PF engine per L1 bank sharing
// the fused PFHR array. Trigger accesses look ahead `distance` elements; fills
// walk DIG edges to spawn the next level of the chain; in shared mode the
// handshake routes every request to the engine owning the block's color.
class TilePrefetcher {
public:
    TilePrefetcher() = default;
    TilePrefetcher(std::uint32_t num_engines, const PfConfig& cfg, const Dig* dig,
                   const MemoryImage* image, std::uint32_t block_bytes);

    void set_mode(CacheMode mode);
    CacheMode mode() const { return mode_; }

    // d >= 1; applies to subsequent trigger candidates of one engine.
    void set_aggressiveness(std::uint32_t engine, std::uint32_t d);

    // Demand load observed at `engine`'s bank (post-coloring in shared mode).
    void on_demand_access(std::uint32_t engine, std::uint16_t gpe, Addr addr,
                          Cycle cycle);

    // A fill landed in `engine`'s bank.
    void on_fill(std::uint32_t engine, BlockAddr block, Cycle cycle);

    using IssueFn =
        std::function<PfIssueResult(std::uint32_t engine, BlockAddr block, Cycle)>;

    // One cycle of PFHR arbitration, candidate allocation/routing, and
    // prefetch issue (at most one issue attempt per engine).
    void tick(Cycle cycle, const IssueFn& try_issue);

    // Stop generating new work; release queued candidates. Fill matches are
    // still consumed so entries retire.
    void set_draining(bool d) { draining_ = d; }

    bool idle() const;
    void reset_for_reconfigure();

    void set_event_log(EventLog* log, std::uint32_t tile_id) {
        log_ = log;
        tile_id_ = tile_id;
    }

    const FusedPfhrArray& pfhr() const { return pfhr_; }
    FusedPfhrArray& pfhr() { return pfhr_; }
    const PfEngineStats& engine_stats(std::uint32_t e) const { return engines_[e].stats; }
    std::uint32_t num_engines() const { return static_cast<std::uint32_t>(engines_.size()); }

    // Exposed for unit tests: owner engine + handoff delay for a candidate
    // block generated at `from`.
    std::pair<std::uint32_t, Cycle> route(BlockAddr block, std::uint32_t from,
                                          Cycle cycle) const;

private:
    struct PendingAlloc {
        std::uint32_t node_id = 0;
        std::uint64_t elem_begin = 0;
        std::uint64_t elem_end = 0;
        std::uint16_t gpe = 0;
        std::uint32_t depth = 0;
    };
    struct IssueItem {
        EntryHandle entry;
        BlockAddr block = 0;
        Cycle ready = 0;
        bool foreign = false;
    };
    // Small LRU filter over recently generated (node, element) candidates;
    // stops the same chain step from being re-walked back to back (paired
    // offsets loads, shared neighbors) without blocking other elements that
    // share a cache block.
    struct RecentFilter {
        std::vector<std::uint64_t> keys;
        std::vector<std::uint64_t> stamp;
        std::uint64_t clock = 0;
        void resize(std::uint32_t n) {
            keys.assign(n, ~0ULL);
            stamp.assign(n, 0);
        }
        bool check_and_insert(std::uint64_t key) {  // true when recently seen
            if (keys.empty()) return false;
            std::size_t victim = 0;
            for (std::size_t i = 0; i < keys.size(); ++i) {
                if (keys[i] == key) {
                    stamp[i] = ++clock;
                    return true;
                }
                if (stamp[i] < stamp[victim]) victim = i;
            }
            keys[victim] = key;
            stamp[victim] = ++clock;
            return false;
        }
    };

    struct Engine {
        std::deque<PendingAlloc> alloc_ops;
        std::deque<BlockAddr> fill_ops;
        std::deque<IssueItem> issue_q;
        std::uint32_t foreign_in_q = 0;
        std::uint32_t distance = 8;
        RecentFilter filter;
        PfEngineStats stats;
    };

    static constexpr std::uint32_t kAllocQueueCap = 64;

    BlockAddr block_of(const DigNode& node, std::uint64_t elem) const {
        return (node.base + elem * node.elem_size) / block_bytes_;
    }
    std::uint64_t node_value(const DigNode& node, std::uint64_t elem) const;
    void push_candidate(std::uint32_t engine, const PendingAlloc& c,
                        std::uint64_t element_count);
    void route_and_enqueue(std::uint32_t from, const EntryHandle& h, BlockAddr block,
                           Cycle cycle);
    void process_entry_fill(std::uint32_t engine, const EntryHandle& h,
                            BlockAddr block, Cycle cycle);
    void execute_alloc(std::uint32_t engine, std::uint32_t bank, Cycle cycle);
    void execute_fill_match(std::uint32_t engine, std::uint32_t bank, BlockAddr block,
                            Cycle cycle);
    void drain_engine(std::uint32_t e);

    std::vector<Engine> engines_;
    FusedPfhrArray pfhr_;
    PfConfig cfg_;
    const Dig* dig_ = nullptr;
    const MemoryImage* image_ = nullptr;
    std::uint32_t block_bytes_ = 64;
    CacheMode mode_ = CacheMode::Shared;
    bool draining_ = false;
    EventLog* log_ = nullptr;
    std::uint32_t tile_id_ = 0;
};

} // namespace tmsim
