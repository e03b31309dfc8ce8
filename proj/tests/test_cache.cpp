#include <doctest.h>

#include "tmsim/cache.hpp"

using namespace tmsim;

namespace {
CacheConfig small_cfg() {
    CacheConfig c;
    c.size_bytes = 1024;  // 4 sets x 4 ways x 64B
    c.assoc = 4;
    c.block_bytes = 64;
    c.mshr_count = 8;
    return c;
}
} // namespace

TEST_CASE("color is block index mod banks") {
    CHECK(color(0, 64, 16) == 0);
    CHECK(color(64, 64, 16) == 1);
    CHECK(color(64 * 16, 64, 16) == 0);
    CHECK(color(130, 64, 4) == 2);
}

TEST_CASE("cache config validation") {
    CacheConfig c = small_cfg();
    c.assoc = 3;  // 1024 / (3*64) not integral
    CHECK_THROWS_AS(c.validate("l1"), ValidationError);
    c = small_cfg();
    c.block_bytes = 48;
    CHECK_THROWS_AS(c.validate("l1"), ValidationError);
    CHECK_NOTHROW(small_cfg().validate("l1"));
}

TEST_CASE("hit after fill, merge semantics, mshr exhaustion") {
    CacheBank bank(small_cfg(), 0);

    // cold miss allocates
    CHECK(bank.access_demand(100, false, 0, 1) == AccessOutcome::MissAllocated);
    // same block from another core merges without a new packet
    CHECK(bank.access_demand(100, false, 1, 2) == AccessOutcome::MissMerged);
    CHECK(bank.stats.mshr_allocs == 1);

    FillResult fr = bank.fill(100, 10);
    CHECK(fr.load_waiters == std::vector<std::uint32_t>{0, 1});
    CHECK_FALSE(fr.was_prefetch);

    CHECK(bank.access_demand(100, false, 0, 11) == AccessOutcome::Hit);
    CHECK(bank.stats.hits == 1);
    CHECK(bank.stats.misses == 2);
    CHECK(bank.stats.accesses == 3);

    // 8 distinct outstanding misses exhaust the MSHRs; the 9th blocks
    for (std::uint64_t b = 0; b < 8; ++b)
        CHECK(bank.access_demand(200 + b, false, 0, 20) == AccessOutcome::MissAllocated);
    CHECK(bank.access_demand(300, false, 0, 21) == AccessOutcome::BlockedMshr);
    CHECK(bank.stats.blocked_mshr == 1);
}

TEST_CASE("true LRU eviction and replacement counting") {
    CacheBank bank(small_cfg(), 0);
    // Five blocks mapping to set 0 (multiples of 4 with 4 sets).
    const BlockAddr blocks[5] = {0, 4, 8, 12, 16};
    for (BlockAddr b : blocks) {
        CHECK(bank.access_demand(b, false, 0, b) == AccessOutcome::MissAllocated);
        bank.fill(b, b);
    }
    CHECK(bank.stats.replacements == 1);  // only the fifth fill evicts
    // block 0 was LRU; it must be gone, 4..16 resident
    CHECK_FALSE(bank.resident(0));
    for (int i = 1; i < 5; ++i) CHECK(bank.resident(blocks[i]));

    // touch 4, then fill two more set-0 blocks: victims are 8 then 12
    CHECK(bank.access_demand(4, false, 0, 100) == AccessOutcome::Hit);
    bank.access_demand(20, false, 0, 101);
    bank.fill(20, 102);
    CHECK_FALSE(bank.resident(8));
    CHECK(bank.resident(4));
}

TEST_CASE("prefetch fill bookkeeping") {
    CacheBank bank(small_cfg(), 0);

    SUBCASE("unused prefetched line evicted increments the unused counter") {
        CHECK(bank.probe_prefetch(0, 1) == AccessOutcome::MissAllocated);
        bank.fill(0, 2);
        CHECK(bank.stats.prefetch_fills == 1);
        for (BlockAddr b : {4, 8, 12, 16}) {
            bank.probe_prefetch(b, 3);
            bank.fill(b, 4);
        }
        CHECK(bank.stats.prefetch_fills_evicted_unused == 1);
        CHECK(bank.stats.prefetch_fills_used == 0);
    }
    SUBCASE("demand touch marks the line used exactly once") {
        bank.probe_prefetch(0, 1);
        bank.fill(0, 2);
        CHECK(bank.access_demand(0, false, 0, 3) == AccessOutcome::Hit);
        CHECK(bank.access_demand(0, false, 0, 4) == AccessOutcome::Hit);
        CHECK(bank.stats.prefetch_fills_used == 1);
    }
    SUBCASE("demand merging into a prefetch miss counts as used on arrival") {
        bank.probe_prefetch(0, 1);
        CHECK(bank.access_demand(0, false, 5, 2) == AccessOutcome::MissMerged);
        FillResult fr = bank.fill(0, 3);
        CHECK(fr.was_prefetch);
        CHECK(fr.load_waiters == std::vector<std::uint32_t>{5});
        CHECK(bank.stats.prefetch_fills == 1);
        CHECK(bank.stats.prefetch_fills_used == 1);
    }
    SUBCASE("redundant prefetch probes do not allocate") {
        bank.access_demand(0, false, 0, 1);
        bank.fill(0, 2);
        CHECK(bank.probe_prefetch(0, 3) == AccessOutcome::Hit);
        CHECK(bank.stats.mshr_allocs == 1);
    }
}

TEST_CASE("stores write-allocate and mark dirty") {
    CacheBank bank(small_cfg(), 0);
    CHECK(bank.access_demand(0, true, 0, 1) == AccessOutcome::MissAllocated);
    FillResult fr = bank.fill(0, 2);
    CHECK(fr.load_waiters.empty());
    // evict it by filling the set; the dirty line must ask for a writeback
    for (BlockAddr b : {4, 8, 12, 16}) {
        bank.access_demand(b, false, 0, 3);
        bank.fill(b, 4);
    }
    CHECK(bank.stats.writebacks == 1);
}

TEST_CASE("writeback probe marks resident lines dirty, misses pass through") {
    CacheBank bank(small_cfg(), 0);
    bank.access_demand(0, false, 0, 1);
    bank.fill(0, 2);
    CHECK(bank.writeback_probe(0));
    CHECK_FALSE(bank.writeback_probe(4));
    CHECK(bank.stats.wb_in == 2);
}

TEST_CASE("fill without mshr is an invariant breach") {
    CacheBank bank(small_cfg(), 0);
    CHECK_THROWS_AS(bank.fill(42, 1), SimAbort);
}

TEST_CASE("invalidate_all flushes dirty lines and reports them") {
    CacheBank bank(small_cfg(), 0);
    bank.access_demand(0, true, 0, 1);
    bank.fill(0, 2);
    bank.access_demand(4, false, 0, 3);
    bank.fill(4, 4);
    std::vector<BlockAddr> dirty;
    bank.invalidate_all(&dirty);
    CHECK(dirty == std::vector<BlockAddr>{0});
    CHECK_FALSE(bank.resident(0));
    CHECK_FALSE(bank.resident(4));
}
