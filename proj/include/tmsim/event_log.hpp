#pragma once
#include <cstdint>
#include <vector>

#include "tmsim/cache.hpp"

namespace tmsim {

// Optional per-run event trace used by tests to cross-check the live
// counters (dual accounting). Off by default; enable only on small runs.
struct EventLog {
    struct L1Access {
        std::uint32_t bank;
        bool hit;
    };
    struct L1Fill {
        BlockAddr block;
        std::uint32_t bank;
        bool is_prefetch;
        bool color_ok;      // shared mode: bank matches the block's color
        bool used_on_arrival;
    };
    struct XbarEvent {
        Cycle cycle;
        std::uint32_t queued;  // losers this delivery
    };
    struct Squash {
        Cycle cycle;
        std::uint16_t req_gpe;
        std::uint16_t victim_gpe;
    };
    struct PfhrAccess {
        Cycle cycle;
        std::uint32_t tile;
        std::uint32_t bank;
    };

    std::vector<L1Access> l1_accesses;
    std::vector<L1Fill> l1_fills;
    std::vector<XbarEvent> xbar_deliveries;
    std::vector<Squash> squashes;
    std::vector<PfhrAccess> pfhr_accesses;
};

} // namespace tmsim
