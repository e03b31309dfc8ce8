#include "tmsim/sim.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <sstream>
#include <tuple>

#include "tmsim/hbm.hpp"
#include "tmsim/xbar.hpp"

namespace tmsim {

CacheConfig TmConfig::l1_config() const {
    CacheConfig c;
    if (l1_total_kb != 0) {
        const std::uint64_t total = static_cast<std::uint64_t>(l1_total_kb) * 1024;
        if (total % l1_banks_total() != 0)
            throw ValidationError("l1_total_kb not divisible by the L1 bank count");
        c.size_bytes = static_cast<std::uint32_t>(total / l1_banks_total());
    } else {
        c.size_bytes = l1_size_kb_per_bank * 1024;
    }
    c.assoc = l1_assoc;
    c.block_bytes = block_bytes;
    c.mshr_count = l1_mshrs;
    return c;
}

CacheConfig TmConfig::l2_config() const {
    CacheConfig c;
    const std::uint64_t total = static_cast<std::uint64_t>(l2_total_kb) * 1024;
    if (total % l2_banks_total() != 0)
        throw ValidationError("l2_total_kb not divisible by the L2 bank count");
    c.size_bytes = static_cast<std::uint32_t>(total / l2_banks_total());
    c.assoc = l2_assoc;
    c.block_bytes = block_bytes;
    c.mshr_count = l2_mshrs;
    return c;
}

void TmConfig::validate() const {
    if (tiles < 1) throw ValidationError("tiles must be >= 1");
    if (gpes_per_tile < 1) throw ValidationError("gpes_per_tile must be >= 1");
    auto pow2 = [](std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; };
    if (!pow2(gpes_per_tile))
        throw ValidationError("gpes_per_tile must be a power of two (bank coloring)");
    if (!pow2(l2_banks_per_tile) || !pow2(tiles))
        throw ValidationError("tiles and l2_banks_per_tile must be powers of two");
    if (hbm_lat_max < hbm_lat_min) throw ValidationError("hbm_lat_max < hbm_lat_min");
    if (hbm_channels < 1) throw ValidationError("hbm_channels must be >= 1");
    l1_config().validate("l1 config");
    l2_config().validate("l2 config");
    if (pf.enabled) pf.validate();
}

std::uint32_t Tile::live_mshrs() const {
    std::uint32_t n = 0;
    for (const auto& b : banks) n += b.live_mshrs();
    return n;
}

void Tile::reconfigure(CacheMode new_mode) {
    if (new_mode == mode) return;
    if (live_mshrs() != 0)
        throw ValidationError("reconfigure with outstanding MSHRs");
    const std::uint32_t stride =
        new_mode == CacheMode::Shared ? static_cast<std::uint32_t>(banks.size()) : 1;
    for (auto& b : banks) {
        b.invalidate_all(nullptr);
        b.set_index_stride(stride);
    }
    pf.reset_for_reconfigure();
    pf.set_mode(new_mode);
    mode = new_mode;
}

Cycle barrier_release_cycle(const std::vector<Cycle>& arrivals) {
    if (arrivals.empty()) return 0;
    return *std::max_element(arrivals.begin(), arrivals.end()) + 1;
}

namespace {

struct Core {
    std::uint32_t gpe = 0;
    std::uint32_t tile = 0;
    std::uint32_t segment = 0;
    std::size_t index = 0;
    Cycle ready_at = 0;
    bool blocked = false;
    Cycle blocked_since = 0;
    bool arrived = false;
    CoreStats stats;
};

struct TimedBlockEvent {
    Cycle at;
    std::uint64_t seq;
    std::uint32_t bank;  // L2 bank for HBM events, global L1 bank for fills
    BlockAddr block;
};
struct EventAfter {
    bool operator()(const TimedBlockEvent& a, const TimedBlockEvent& b) const {
        return std::tie(a.at, a.seq) > std::tie(b.at, b.seq);
    }
};
using EventHeap =
    std::priority_queue<TimedBlockEvent, std::vector<TimedBlockEvent>, EventAfter>;

class Simulator {
public:
    Simulator(const KernelRun& kr, const TmConfig& cfg, EventLog* log)
        : kr_(kr), cfg_(cfg), log_(log) {
        cfg_.validate();
        if (kr_.num_gpes != cfg_.num_gpes())
            throw ValidationError("kernel run GPE count does not match the TM config");

        hbm_ = HbmModel(cfg_.hbm_channels, cfg_.hbm_lat_min, cfg_.hbm_lat_max,
                        cfg_.hbm_occupancy, cfg_.seed);
        xbar_ = Xbar(cfg_.l1_banks_total(), cfg_.l2_banks_total(),
                     cfg_.xbar_window_cycles);
        xbar_.set_event_log(log_);

        tiles_.resize(cfg_.tiles);
        const std::uint32_t l1_stride =
            cfg_.cache_mode == CacheMode::Shared ? cfg_.gpes_per_tile : 1;
        for (std::uint32_t t = 0; t < cfg_.tiles; ++t) {
            Tile& tile = tiles_[t];
            tile.tile_id = t;
            tile.mode = cfg_.cache_mode;
            for (std::uint32_t b = 0; b < cfg_.gpes_per_tile; ++b)
                tile.banks.emplace_back(cfg_.l1_config(), t * cfg_.gpes_per_tile + b,
                                        l1_stride);
            tile.pf = TilePrefetcher(cfg_.gpes_per_tile, cfg_.pf, &kr_.dig, &kr_.image,
                                     cfg_.block_bytes);
            tile.pf.set_mode(cfg_.cache_mode);
            tile.pf.set_event_log(log_, t);
        }
        for (std::uint32_t b = 0; b < cfg_.l2_banks_total(); ++b)
            l2_.emplace_back(cfg_.l2_config(), b, cfg_.l2_banks_total());

        num_segments_ = kr_.streams.empty() ? 0
                                            : static_cast<std::uint32_t>(kr_.streams[0].size());
        cores_.resize(cfg_.num_gpes());
        for (std::uint32_t g = 0; g < cfg_.num_gpes(); ++g) {
            Core& core = cores_[g];
            core.gpe = g;
            core.tile = g / cfg_.gpes_per_tile;
            if (num_segments_ == 0) continue;
            const auto& s = kr_.streams[g][0];
            if (s.empty()) {
                core.arrived = true;
                arrived_count_++;
            } else {
                core.ready_at = s.front().compute_gap;
            }
        }
        bank_reqs_.resize(cfg_.l1_banks_total());
        bank_rr_.assign(cfg_.l1_banks_total(), 0);
        pf_port_used_.assign(cfg_.l1_banks_total(), 0);
        cores_done_ = num_segments_ == 0;
    }

    SimResult run();

private:
    const std::vector<MemRef>& seg(const Core& c) const {
        return kr_.streams[c.gpe][c.segment];
    }
    const MemRef& cur_ref(const Core& c) const { return seg(c)[c.index]; }

    std::uint32_t bank_for(const Core& core, Addr addr) const {
        const std::uint32_t local =
            cfg_.cache_mode == CacheMode::Shared
                ? color(addr, cfg_.block_bytes, cfg_.gpes_per_tile)
                : core.gpe % cfg_.gpes_per_tile;
        return core.tile * cfg_.gpes_per_tile + local;
    }

    CacheBank& l1_bank(std::uint32_t global) {
        return tiles_[global / cfg_.gpes_per_tile].banks[global % cfg_.gpes_per_tile];
    }

    void enqueue_read(std::uint32_t src_bank, BlockAddr block, bool is_prefetch) {
        XbarPacket p;
        p.block = block;
        p.src = static_cast<std::uint16_t>(src_bank);
        p.dst = static_cast<std::uint16_t>(block % cfg_.l2_banks_total());
        p.kind = PacketKind::Read;
        p.is_prefetch = is_prefetch;
        xbar_.enqueue(p);
    }

    void enqueue_writeback(std::uint32_t src_bank, BlockAddr block) {
        XbarPacket p;
        p.block = block;
        p.src = static_cast<std::uint16_t>(src_bank);
        p.dst = static_cast<std::uint16_t>(block % cfg_.l2_banks_total());
        p.kind = PacketKind::Writeback;
        xbar_.enqueue(p);
    }

    void retire_and_advance(Core& core, Cycle c) {
        core.stats.refs_retired++;
        core.index++;
        progress_ = true;
        if (core.index < seg(core).size()) {
            core.ready_at = c + 1 + cur_ref(core).compute_gap;
        } else {
            core.arrived = true;  // barrier arrival at the retire cycle
            arrived_count_++;
        }
    }

    // --- cycle phases -------------------------------------------------

    void phase_xbar(Cycle c) {
        xbar_.tick(c, [&](const XbarPacket& p, Cycle cycle) {
            return deliver_l2(p, cycle);
        });
    }

    bool deliver_l2(const XbarPacket& p, Cycle c) {
        CacheBank& bank = l2_[p.dst];
        if (p.kind == PacketKind::Writeback) {
            if (!bank.writeback_probe(p.block)) hbm_.posted_write(p.block, c + 1);
            progress_ = true;
            return true;
        }
        switch (bank.access_demand(p.block, false, p.src, c)) {
            case AccessOutcome::Hit:
                l1_fills_.push({c + 1, seq_++, p.src, p.block});
                progress_ = true;
                return true;
            case AccessOutcome::MissMerged:
                progress_ = true;
                return true;
            case AccessOutcome::MissAllocated: {
                const Cycle done = hbm_.request(p.block, c + 1);
                hbm_events_.push({done, seq_++, p.dst, p.block});
                progress_ = true;
                return true;
            }
            case AccessOutcome::BlockedMshr:
                return false;
        }
        return false;
    }

    void phase_hbm(Cycle c) {
        while (!hbm_events_.empty() && hbm_events_.top().at <= c) {
            const TimedBlockEvent ev = hbm_events_.top();
            hbm_events_.pop();
            FillResult res = l2_[ev.bank].fill(ev.block, c);
            if (res.evicted_valid && res.evicted_dirty)
                hbm_.posted_write(res.evicted_block, c);
            for (std::uint32_t l1b : res.load_waiters)
                l1_fills_.push({c + 1, seq_++, l1b, ev.block});
            progress_ = true;
        }
    }

    void phase_l1_fills(Cycle c) {
        while (!l1_fills_.empty() && l1_fills_.top().at <= c) {
            const TimedBlockEvent ev = l1_fills_.top();
            l1_fills_.pop();
            const std::uint32_t tile = ev.bank / cfg_.gpes_per_tile;
            const std::uint32_t local = ev.bank % cfg_.gpes_per_tile;
            CacheBank& bank = tiles_[tile].banks[local];
            FillResult res = bank.fill(ev.block, c);
            if (res.evicted_valid && res.evicted_dirty)
                enqueue_writeback(ev.bank, res.evicted_block);
            if (res.was_prefetch && cfg_.cache_mode == CacheMode::Shared) {
                const bool ok = ev.block % cfg_.gpes_per_tile == local;
                if (!ok) bank.stats.prefetch_fills_wrong_bank++;
            }
            if (log_) {
                const bool ok = cfg_.cache_mode != CacheMode::Shared ||
                                ev.block % cfg_.gpes_per_tile == local;
                log_->l1_fills.push_back(
                    {ev.block, ev.bank, res.was_prefetch, ok, !res.load_waiters.empty()});
            }
            for (std::uint32_t gpe : res.load_waiters) {
                Core& core = cores_[gpe];
                core.blocked = false;
                core.stats.cycles_stalled += c - core.blocked_since;
                retire_and_advance(core, c);
            }
            if (cfg_.pf.enabled) tiles_[tile].pf.on_fill(local, ev.block, c);
            progress_ = true;
        }
    }

    void phase_core_intents(Cycle c) {
        touched_banks_.clear();
        std::fill(pf_port_used_.begin(), pf_port_used_.end(), 0);
        for (Core& core : cores_) {
            if (cores_done_ || core.arrived || core.blocked) continue;
            if (core.ready_at > c) continue;
            const std::uint32_t bank = bank_for(core, cur_ref(core).address);
            if (bank_reqs_[bank].empty()) touched_banks_.push_back(bank);
            bank_reqs_[bank].push_back(core.gpe);
        }
    }

    void phase_pf(Cycle c) {
        if (!cfg_.pf.enabled) return;
        const std::uint32_t ports = cfg_.l1_config().ports;
        for (Tile& tile : tiles_) {
            tile.pf.tick(c, [&](std::uint32_t engine, BlockAddr block, Cycle cycle) {
                const std::uint32_t global = tile.tile_id * cfg_.gpes_per_tile + engine;
                // Demand has port priority; prefetch probes use leftover slots.
                if (bank_reqs_[global].size() + pf_port_used_[global] >= ports)
                    return PfIssueResult::PortBusy;
                pf_port_used_[global]++;
                CacheBank& bank = tile.banks[engine];
                switch (bank.probe_prefetch(block, cycle)) {
                    case AccessOutcome::Hit:
                        return PfIssueResult::Redundant;
                    case AccessOutcome::MissMerged:
                        progress_ = true;
                        return PfIssueResult::Merged;
                    case AccessOutcome::MissAllocated:
                        enqueue_read(global, block, true);
                        progress_ = true;
                        return PfIssueResult::Issued;
                    case AccessOutcome::BlockedMshr:
                        return PfIssueResult::MshrFull;
                }
                return PfIssueResult::MshrFull;
            });
        }
    }

    void phase_banks(Cycle c) {
        const std::uint32_t ports = cfg_.l1_config().ports;
        std::sort(touched_banks_.begin(), touched_banks_.end());
        for (std::uint32_t bank_id : touched_banks_) {
            auto& reqs = bank_reqs_[bank_id];
            std::sort(reqs.begin(), reqs.end());
            // Round-robin: grant up to `ports` requesters starting at the
            // pointer; everyone else retries next cycle.
            std::size_t start = 0;
            for (std::size_t i = 0; i < reqs.size(); ++i)
                if (reqs[i] >= bank_rr_[bank_id]) {
                    start = i;
                    break;
                }
            const std::uint32_t budget =
                ports > pf_port_used_[bank_id] ? ports - pf_port_used_[bank_id] : 0;
            const std::size_t grants = std::min<std::size_t>(budget, reqs.size());
            for (std::size_t k = grants; k < reqs.size(); ++k)
                cores_[reqs[(start + k) % reqs.size()]].stats.cycles_stalled++;
            for (std::size_t k = 0; k < grants; ++k) {
                const std::uint32_t winner = reqs[(start + k) % reqs.size()];
                bank_rr_[bank_id] = (winner + 1) % cfg_.num_gpes();
                serve_demand(bank_id, winner, c);
            }
            reqs.clear();
        }
    }

    void serve_demand(std::uint32_t bank_id, std::uint32_t winner, Cycle c) {
        Core& core = cores_[winner];
        const MemRef& ref = cur_ref(core);
        const BlockAddr block = ref.address / cfg_.block_bytes;
        CacheBank& bank = l1_bank(bank_id);
        const bool is_store = ref.kind == AccessKind::Store;
        const AccessOutcome out = bank.access_demand(block, is_store, winner, c);

        if (log_ && out != AccessOutcome::BlockedMshr)
            log_->l1_accesses.push_back({bank_id, out == AccessOutcome::Hit});

        switch (out) {
            case AccessOutcome::Hit:
                retire_and_advance(core, c);
                break;
            case AccessOutcome::MissAllocated:
                enqueue_read(bank_id, block, false);
                [[fallthrough]];
            case AccessOutcome::MissMerged:
                if (is_store) {
                    retire_and_advance(core, c);  // posted
                } else {
                    core.blocked = true;
                    core.blocked_since = c;
                }
                progress_ = true;
                break;
            case AccessOutcome::BlockedMshr:
                core.stats.cycles_stalled++;
                break;
        }
        if (cfg_.pf.enabled && !is_store && out != AccessOutcome::BlockedMshr) {
            tiles_[core.tile].pf.on_demand_access(bank_id % cfg_.gpes_per_tile,
                                                  static_cast<std::uint16_t>(winner),
                                                  ref.address, c);
        }
    }

    void phase_barrier(Cycle c) {
        while (arrived_count_ == cores_.size() && !cores_done_) {
            if (current_segment_ + 1 >= num_segments_) {
                cores_done_ = true;
                for (Tile& t : tiles_) t.pf.set_draining(true);
                progress_ = true;
                return;
            }
            current_segment_++;
            arrived_count_ = 0;
            for (Core& core : cores_) {
                core.segment = current_segment_;
                core.index = 0;
                core.arrived = false;
                if (seg(core).empty()) {
                    core.arrived = true;
                    arrived_count_++;
                } else {
                    core.ready_at = c + 1 + cur_ref(core).compute_gap;
                }
            }
            progress_ = true;
        }
    }

    bool mshrs_drained() const {
        for (const Tile& t : tiles_)
            if (t.live_mshrs() != 0) return false;
        for (const CacheBank& b : l2_)
            if (b.live_mshrs() != 0) return false;
        return true;
    }

    bool pf_idle() const {
        if (!cfg_.pf.enabled) return true;
        for (const Tile& t : tiles_)
            if (!t.pf.idle()) return false;
        return true;
    }

    bool done() const {
        return cores_done_ && hbm_events_.empty() && l1_fills_.empty() &&
               xbar_.empty() && pf_idle() && mshrs_drained();
    }

    std::optional<Cycle> next_cycle_after(Cycle c) const {
        std::optional<Cycle> best;
        auto consider = [&](Cycle x) {
            const Cycle v = std::max(x, c + 1);
            if (!best || v < *best) best = v;
        };
        if (!hbm_events_.empty()) consider(hbm_events_.top().at);
        if (!l1_fills_.empty()) consider(l1_fills_.top().at);
        if (!xbar_.empty()) consider(c + 1);
        if (!pf_idle()) consider(c + 1);
        for (const Core& core : cores_) {
            if (cores_done_ || core.arrived || core.blocked) continue;
            consider(core.ready_at);
        }
        return best;
    }

    void verify_coloring() const {
        if (cfg_.cache_mode != CacheMode::Shared || cfg_.pf.ablate_handshake) return;
        for (const Tile& t : tiles_)
            for (std::uint32_t local = 0; local < t.banks.size(); ++local)
                t.banks[local].for_each_resident([&](BlockAddr block) {
                    if (block % cfg_.gpes_per_tile != local)
                        throw SimAbort("coloring violated: resident block in wrong bank");
                });
    }

    std::string diagnostic_dump(Cycle c) const {
        std::ostringstream os;
        os << "no progress at cycle " << c << ": ";
        std::uint32_t blocked = 0, waiting = 0;
        for (const Core& core : cores_) {
            blocked += core.blocked ? 1 : 0;
            waiting += core.arrived ? 1 : 0;
        }
        os << blocked << " cores blocked, " << waiting << " at barrier, xbar occ "
           << xbar_.occupancy() << ", hbm events " << hbm_events_.size()
           << ", fills " << l1_fills_.size() << ", segment " << current_segment_
           << "/" << num_segments_;
        return os.str();
    }

    const KernelRun& kr_;
    TmConfig cfg_;
    EventLog* log_;
    std::vector<Tile> tiles_;
    std::vector<CacheBank> l2_;
    Xbar xbar_;
    HbmModel hbm_;
    std::vector<Core> cores_;
    EventHeap hbm_events_;
    EventHeap l1_fills_;
    std::uint64_t seq_ = 0;
    std::vector<std::vector<std::uint32_t>> bank_reqs_;
    std::vector<std::uint32_t> bank_rr_;
    std::vector<std::uint32_t> pf_port_used_;
    std::vector<std::uint32_t> touched_banks_;
    std::uint32_t num_segments_ = 0;
    std::uint32_t current_segment_ = 0;
    std::size_t arrived_count_ = 0;
    bool cores_done_ = false;
    bool progress_ = false;
};

SimResult Simulator::run() {
    constexpr std::uint64_t kLivelockWindow = 1000000;
    Cycle c = 0;
    Cycle total = 0;
    std::uint64_t idle_ticks = 0;

    while (!done()) {
        if (c > cfg_.max_cycles)
            throw SimAbort("max-cycles guard exceeded at cycle " + std::to_string(c));
        progress_ = false;

        phase_xbar(c);
        phase_hbm(c);
        phase_l1_fills(c);
        phase_core_intents(c);
        phase_pf(c);
        phase_banks(c);
        phase_barrier(c);

        total = c;
        if (progress_)
            idle_ticks = 0;
        else if (++idle_ticks > kLivelockWindow)
            throw SimAbort("livelock guard: " + diagnostic_dump(c));

        if (done()) break;
        auto nxt = next_cycle_after(c);
        if (!nxt) throw SimAbort("deadlock: " + diagnostic_dump(c));
        c = *nxt;
    }
    verify_coloring();

    SimResult res;
    res.total_cycles = total;
    res.refs_total = kr_.total_refs();
    res.result_checksum = kr_.result_checksum();
    CycleStats& s = res.stats;
    for (const Tile& t : tiles_) {
        for (const CacheBank& b : t.banks) s.l1.push_back(b.stats);
        for (std::uint32_t e = 0; e < t.pf.num_engines(); ++e)
            s.pf.push_back(t.pf.engine_stats(e));
        s.pfhr.push_back(t.pf.pfhr().stats);
    }
    for (const CacheBank& b : l2_) s.l2.push_back(b.stats);
    for (const Core& core : cores_) s.cores.push_back(core.stats);
    s.xbar_queued = xbar_.total_queued();
    s.xbar_through = xbar_.total_through();
    s.xbar_blocked = xbar_.total_blocked();
    s.xbar_windows = xbar_.windows();
    s.hbm_blocks = hbm_.blocks_transferred();
    return res;
}

} // namespace

SimResult run_simulation(const KernelRun& kr, const TmConfig& cfg, EventLog* log) {
    Simulator sim(kr, cfg, log);
    return sim.run();
}

BaselinePfResult run_baseline_and_pf(const KernelRun& kr, const TmConfig& cfg) {
    BaselinePfResult out;
    TmConfig off = cfg;
    off.pf.enabled = false;
    TmConfig on = cfg;
    on.pf.enabled = true;
    out.baseline = run_simulation(kr, off);
    out.pf = run_simulation(kr, on);
    out.speedup = out.pf.total_cycles == 0
                      ? 1.0
                      : static_cast<double>(out.baseline.total_cycles) /
                            static_cast<double>(out.pf.total_cycles);
    return out;
}

} // namespace tmsim
