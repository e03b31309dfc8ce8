#include "tmsim/stats.hpp"

#include "tmsim/errors.hpp"

namespace tmsim {

#define SUM_OVER(vec, field)                        \
    do {                                            \
        std::uint64_t total = 0;                    \
        for (const auto& item : (vec)) total += item.field; \
        return total;                               \
    } while (0)

std::uint64_t CycleStats::l1_accesses() const { SUM_OVER(l1, accesses); }
std::uint64_t CycleStats::l1_hits() const { SUM_OVER(l1, hits); }
std::uint64_t CycleStats::l1_misses() const { SUM_OVER(l1, misses); }
std::uint64_t CycleStats::l1_fills() const { SUM_OVER(l1, fills); }
std::uint64_t CycleStats::l1_mshr_allocs() const { SUM_OVER(l1, mshr_allocs); }
std::uint64_t CycleStats::l1_replacements() const { SUM_OVER(l1, replacements); }
std::uint64_t CycleStats::l1_pf_probes() const { SUM_OVER(l1, pf_probes); }
std::uint64_t CycleStats::prefetch_fills() const { SUM_OVER(l1, prefetch_fills); }
std::uint64_t CycleStats::prefetch_fills_used() const { SUM_OVER(l1, prefetch_fills_used); }
std::uint64_t CycleStats::prefetch_fills_evicted_unused() const {
    SUM_OVER(l1, prefetch_fills_evicted_unused);
}
std::uint64_t CycleStats::prefetch_fills_wrong_bank() const {
    SUM_OVER(l1, prefetch_fills_wrong_bank);
}
std::uint64_t CycleStats::l2_accesses() const {
    std::uint64_t total = 0;
    for (const auto& b : l2) total += b.accesses + b.wb_in;
    return total;
}
std::uint64_t CycleStats::l2_hits() const { SUM_OVER(l2, hits); }
std::uint64_t CycleStats::l2_misses() const { SUM_OVER(l2, misses); }
std::uint64_t CycleStats::pf_candidates() const { SUM_OVER(pf, candidates); }
std::uint64_t CycleStats::pf_issued() const { SUM_OVER(pf, issued); }
std::uint64_t CycleStats::pfhr_ops() const { SUM_OVER(pf, pfhr_ops); }
std::uint64_t CycleStats::refs_retired() const { SUM_OVER(cores, refs_retired); }
std::uint64_t CycleStats::cycles_stalled() const { SUM_OVER(cores, cycles_stalled); }
std::uint64_t CycleStats::squashes() const { SUM_OVER(pfhr, squashes); }
std::uint64_t CycleStats::cross_gpe_squashes() const { SUM_OVER(pfhr, cross_gpe_squashes); }

std::uint64_t CycleStats::pf_dropped() const {
    std::uint64_t total = 0;
    for (const auto& e : pf)
        total += e.drop_pfhr_alloc_fail + e.drop_refresh + e.drop_inbox_full +
                 e.drop_clamped + e.drop_bad_index + e.drop_filtered +
                 e.drop_depth_cap + e.drop_alloc_queue_full + e.drop_stale +
                 e.drop_run_end;
    return total;
}

#undef SUM_OVER

double miss_rate(const CycleStats& s) {
    const std::uint64_t acc = s.l1_accesses();
    if (acc == 0) throw MetricError("miss_rate undefined: no demand accesses");
    return static_cast<double>(s.l1_misses()) / static_cast<double>(acc);
}

double prefetch_accuracy(const CycleStats& s) {
    const std::uint64_t fills = s.prefetch_fills();
    if (fills == 0) throw MetricError("prefetch_accuracy undefined: no prefetch fills");
    return static_cast<double>(s.prefetch_fills_used()) / static_cast<double>(fills);
}

double contention_ratio(const CycleStats& s) {
    double sum = 0.0;
    std::uint64_t windows = 0;
    for (const XbarWindow& w : s.xbar_windows) {
        if (w.through == 0) continue;
        sum += static_cast<double>(w.queued) / static_cast<double>(w.through);
        ++windows;
    }
    if (windows == 0) throw MetricError("contention_ratio undefined: no crossbar traffic");
    return sum / static_cast<double>(windows);
}

double energy_proxy(const CycleStats& s) {
    const double l1 = static_cast<double>(s.l1_accesses() + s.l1_pf_probes());
    const double l2 = static_cast<double>(s.l2_accesses());
    const double hbm = static_cast<double>(s.hbm_blocks);
    const double pf = static_cast<double>(s.pf_candidates() + s.pfhr_ops());
    return kEnergyWeightL1 * l1 + kEnergyWeightL2 * l2 + kEnergyWeightHbm * hbm +
           kEnergyWeightPf * pf;
}

void check_conservation(const CycleStats& s, std::uint64_t expected_refs) {
    auto fail = [](const std::string& what) {
        throw MetricError("conservation violated: " + what);
    };
    for (std::size_t i = 0; i < s.l1.size(); ++i) {
        const auto& b = s.l1[i];
        if (b.hits + b.misses != b.accesses) fail("l1 hits+misses != accesses");
        if (b.fills != b.mshr_allocs) fail("l1 fills != mshr allocs");
        if (b.prefetch_fills_used + b.prefetch_fills_evicted_unused > b.prefetch_fills)
            fail("l1 prefetch fill accounting");
    }
    for (const auto& b : s.l2) {
        if (b.hits + b.misses != b.accesses) fail("l2 hits+misses != accesses");
        if (b.fills != b.mshr_allocs) fail("l2 fills != mshr allocs");
    }
    if (s.refs_retired() != expected_refs) fail("retired refs != stream length");
    if (s.cross_gpe_squashes() != 0) fail("cross-GPE squash observed");
    if (s.l1_accesses() > 0) {
        const double mr = miss_rate(s);
        if (mr < 0.0 || mr > 1.0) fail("miss rate out of [0,1]");
    }
    if (s.prefetch_fills() > 0) {
        const double pa = prefetch_accuracy(s);
        if (pa < 0.0 || pa > 1.0) fail("prefetch accuracy out of [0,1]");
    }
    bool any_window = false;
    for (const auto& w : s.xbar_windows) any_window |= w.through > 0;
    if (any_window && contention_ratio(s) < 0.0) fail("contention ratio negative");
}

std::map<std::string, double> stats_to_fields(const CycleStats& s) {
    std::map<std::string, double> f;
    f["l1_demand_accesses"] = static_cast<double>(s.l1_accesses());
    f["l1_demand_hits"] = static_cast<double>(s.l1_hits());
    f["l1_demand_misses"] = static_cast<double>(s.l1_misses());
    f["l1_fills"] = static_cast<double>(s.l1_fills());
    f["l1_replacements"] = static_cast<double>(s.l1_replacements());
    f["l1_prefetch_fills"] = static_cast<double>(s.prefetch_fills());
    f["l1_prefetch_fills_used"] = static_cast<double>(s.prefetch_fills_used());
    f["l1_prefetch_fills_evicted_unused"] =
        static_cast<double>(s.prefetch_fills_evicted_unused());
    f["l2_accesses"] = static_cast<double>(s.l2_accesses());
    f["l2_hits"] = static_cast<double>(s.l2_hits());
    f["l2_misses"] = static_cast<double>(s.l2_misses());
    f["hbm_blocks"] = static_cast<double>(s.hbm_blocks);
    f["xbar_queued"] = static_cast<double>(s.xbar_queued);
    f["xbar_through"] = static_cast<double>(s.xbar_through);
    f["pf_candidates"] = static_cast<double>(s.pf_candidates());
    f["pf_issued"] = static_cast<double>(s.pf_issued());
    f["pf_dropped"] = static_cast<double>(s.pf_dropped());
    f["pfhr_ops"] = static_cast<double>(s.pfhr_ops());
    f["pfhr_squashes"] = static_cast<double>(s.squashes());
    f["refs_retired"] = static_cast<double>(s.refs_retired());
    f["cycles_stalled"] = static_cast<double>(s.cycles_stalled());
    if (s.l1_accesses() > 0) f["l1_miss_rate"] = miss_rate(s);
    if (s.prefetch_fills() > 0) f["prefetch_accuracy"] = prefetch_accuracy(s);
    bool any_window = false;
    for (const auto& w : s.xbar_windows) any_window |= w.through > 0;
    if (any_window) f["contention_ratio"] = contention_ratio(s);
    f["energy_proxy"] = energy_proxy(s);
    return f;
}

} // namespace tmsim
