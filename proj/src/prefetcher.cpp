#include "tmsim/prefetcher.hpp"

#include <algorithm>
#include <cassert>

namespace tmsim {

// ---------------------------------------------------------------------------
// FusedPfhrArray

FusedPfhrArray::FusedPfhrArray(std::uint32_t banks, std::uint32_t entries_per_bank)
    : entries_per_bank_(entries_per_bank) {
    banks_.assign(banks, std::vector<PfhrEntry>(entries_per_bank));
}

std::vector<std::uint32_t> FusedPfhrArray::visible(std::uint32_t engine) const {
    std::vector<std::uint32_t> v;
    v.push_back(engine);
    if (fused_)
        for (std::uint32_t b = 0; b < banks_.size(); ++b)
            if (b != engine) v.push_back(b);
    return v;
}

std::optional<EntryHandle> FusedPfhrArray::find_free(std::uint32_t engine) const {
    for (std::uint32_t b : visible(engine))
        for (std::uint32_t s = 0; s < entries_per_bank_; ++s)
            if (!banks_[b][s].valid)
                return EntryHandle{static_cast<std::uint16_t>(b),
                                   static_cast<std::uint16_t>(s), banks_[b][s].version};
    return std::nullopt;
}

std::optional<EntryHandle> FusedPfhrArray::squash_victim(std::uint32_t engine,
                                                         std::uint16_t gpe_id) const {
    std::optional<EntryHandle> best;
    Cycle oldest = 0;
    for (std::uint32_t b : visible(engine)) {
        for (std::uint32_t s = 0; s < entries_per_bank_; ++s) {
            const PfhrEntry& e = banks_[b][s];
            if (!e.valid || e.gpe_id != gpe_id) continue;
            if (!best || e.alloc_cycle < oldest) {
                best = EntryHandle{static_cast<std::uint16_t>(b),
                                   static_cast<std::uint16_t>(s), e.version};
                oldest = e.alloc_cycle;
            }
        }
    }
    return best;
}

void FusedPfhrArray::release(const EntryHandle& h, ReleaseReason reason,
                             std::uint16_t squash_gpe) {
    PfhrEntry& e = banks_[h.bank][h.slot];
    assert(e.valid && e.version == h.version);
    if (reason == ReleaseReason::Squashed) {
        stats.squashes++;
        if (e.gpe_id != squash_gpe) stats.cross_gpe_squashes++;
    } else if (reason == ReleaseReason::Retired) {
        stats.retired++;
    } else {
        stats.released++;
    }
    e.valid = false;
    e.in_flight = false;
    e.version++;
}

bool FusedPfhrArray::duplicate_exists(std::uint32_t engine, std::uint32_t node_id,
                                      std::uint64_t elem_index) const {
    for (std::uint32_t b : visible(engine))
        for (const PfhrEntry& e : banks_[b])
            if (e.valid && e.node_id == node_id && e.elem_index == elem_index)
                return true;
    return false;
}

std::vector<EntryHandle> FusedPfhrArray::match_block(std::uint32_t engine,
                                                     BlockAddr block) const {
    std::vector<EntryHandle> out;
    for (std::uint32_t b : visible(engine))
        for (std::uint32_t s = 0; s < entries_per_bank_; ++s) {
            const PfhrEntry& e = banks_[b][s];
            if (e.valid && e.issued_block == block)
                out.push_back(EntryHandle{static_cast<std::uint16_t>(b),
                                          static_cast<std::uint16_t>(s), e.version});
        }
    return out;
}

void FusedPfhrArray::invalidate_all() {
    for (auto& bank : banks_)
        for (auto& e : bank) {
            if (e.valid) e.version++;
            e.valid = false;
            e.in_flight = false;
        }
}

std::uint32_t FusedPfhrArray::live_entries() const {
    std::uint32_t n = 0;
    for (const auto& bank : banks_)
        for (const auto& e : bank) n += e.valid ? 1 : 0;
    return n;
}

// ---------------------------------------------------------------------------
// Arbitration

std::vector<std::pair<std::uint32_t, std::uint32_t>> pfhr_arbitrate(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& requests,
    std::uint32_t num_banks, Cycle cycle, bool fused) {
    std::vector<std::vector<std::uint32_t>> per_bank(num_banks);
    for (const auto& [engine, bank] : requests) {
        if (!fused && engine != bank)
            throw std::logic_error("pfhr_arbitrate: foreign bank request in split mode");
        per_bank[bank].push_back(engine);
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> grants;
    for (std::uint32_t b = 0; b < num_banks; ++b) {
        auto& req = per_bank[b];
        if (req.empty()) continue;
        std::sort(req.begin(), req.end());
        grants.emplace_back(req[cycle % req.size()], b);
    }
    return grants;
}

// ---------------------------------------------------------------------------
// TilePrefetcher

TilePrefetcher::TilePrefetcher(std::uint32_t num_engines, const PfConfig& cfg,
                               const Dig* dig, const MemoryImage* image,
                               std::uint32_t block_bytes)
    : pfhr_(num_engines, cfg.entries_per_gpe), cfg_(cfg), dig_(dig), image_(image),
      block_bytes_(block_bytes) {
    cfg_.validate();
    engines_.resize(num_engines);
    for (auto& e : engines_) {
        e.distance = cfg_.distance;
        e.filter.resize(cfg_.filter_entries);
    }
    set_mode(CacheMode::Shared);
}

void TilePrefetcher::set_mode(CacheMode mode) {
    mode_ = mode;
    pfhr_.set_fused(mode == CacheMode::Shared && !cfg_.ablate_fused_pfhr);
}

void TilePrefetcher::set_aggressiveness(std::uint32_t engine, std::uint32_t d) {
    if (d < 1) throw ValidationError("prefetch distance must be >= 1");
    engines_[engine].distance = d;
}

std::uint64_t TilePrefetcher::node_value(const DigNode& node, std::uint64_t elem) const {
    return node.elem_size == 8 ? image_->read_u64(node.array, elem)
                               : image_->read_u32(node.array, elem);
}

std::pair<std::uint32_t, Cycle> TilePrefetcher::route(BlockAddr block,
                                                      std::uint32_t from,
                                                      Cycle cycle) const {
    if (mode_ == CacheMode::Private || cfg_.ablate_handshake) return {from, cycle};
    const std::uint32_t owner =
        static_cast<std::uint32_t>(block % engines_.size());
    return {owner, owner == from ? cycle : cycle + 1};
}

void TilePrefetcher::push_candidate(std::uint32_t engine, const PendingAlloc& c,
                                    std::uint64_t element_count) {
    Engine& en = engines_[engine];
    en.stats.candidates += element_count;
    if (draining_) {
        en.stats.drop_run_end++;
        return;
    }
    if (c.depth > cfg_.max_chain_depth) {
        en.stats.drop_depth_cap++;
        return;
    }
    const std::uint64_t key =
        (static_cast<std::uint64_t>(c.node_id) << 56) | c.elem_begin;
    if (en.filter.check_and_insert(key)) {
        en.stats.drop_filtered++;
        return;
    }
    if (en.alloc_ops.size() >= kAllocQueueCap) {
        en.stats.drop_alloc_queue_full++;
        return;
    }
    en.stats.candidate_ops++;
    en.alloc_ops.push_back(c);
}

void TilePrefetcher::on_demand_access(std::uint32_t engine, std::uint16_t gpe,
                                      Addr addr, Cycle cycle) {
    if (!cfg_.enabled || draining_) return;

    if (cfg_.squash_on_catchup) {
        const BlockAddr b = addr / block_bytes_;
        for (const EntryHandle& h : pfhr_.match_block(engine, b)) {
            if (pfhr_.at(h).gpe_id == gpe) {
                if (log_) log_->squashes.push_back({cycle, gpe, pfhr_.at(h).gpe_id});
                pfhr_.release(h, FusedPfhrArray::ReleaseReason::Squashed, gpe);
                engines_[engine].stats.catchup_squashes++;
            }
        }
    }

    for (const DigNode& node : dig_->nodes) {
        if (!node.is_trigger || node.length == 0) continue;
        if (addr < node.base || addr >= node.base + node.length * node.elem_size)
            continue;
        const std::uint64_t i = (addr - node.base) / node.elem_size;
        const std::uint64_t target = i + engines_[engine].distance;
        if (target >= node.length) {
            engines_[engine].stats.drop_clamped++;
            continue;
        }
        push_candidate(engine, {node.node_id, target, target + 1, gpe, 0}, 1);
    }
}

void TilePrefetcher::on_fill(std::uint32_t engine, BlockAddr block, Cycle) {
    if (!cfg_.enabled) return;
    engines_[engine].fill_ops.push_back(block);
}

void TilePrefetcher::route_and_enqueue(std::uint32_t from, const EntryHandle& h,
                                       BlockAddr block, Cycle cycle) {
    auto [owner, ready] = route(block, from, cycle);
    Engine& own = engines_[owner];
    const bool foreign = owner != from;
    if (foreign && own.foreign_in_q >= cfg_.inbox_depth) {
        engines_[from].stats.drop_inbox_full++;
        pfhr_.release(h, FusedPfhrArray::ReleaseReason::Dropped);
        return;
    }
    own.issue_q.push_back({h, block, ready, foreign});
    if (foreign) own.foreign_in_q++;
}

void TilePrefetcher::process_entry_fill(std::uint32_t engine, const EntryHandle& h,
                                        BlockAddr block, Cycle cycle) {
    PfhrEntry& ent = pfhr_.at(h);
    const DigNode& node = dig_->nodes[ent.node_id];
    Engine& en = engines_[engine];

    // Elements of this entry's span covered by the filled block.
    const std::uint64_t i0 = ent.elem_index;
    std::uint64_t i1 = i0;
    while (i1 < ent.range_end && i1 < node.length && block_of(node, i1) == block)
        ++i1;

    for (std::uint64_t i = i0; i < i1; ++i) {
        for (const DigEdge& edge : dig_->edges) {
            if (edge.src != ent.node_id) continue;
            const DigNode& dst = dig_->nodes[edge.dst];
            switch (edge.kind) {
                case DigEdgeKind::Ranged: {
                    if (i + 1 >= node.length) {
                        en.stats.drop_clamped++;
                        break;
                    }
                    std::uint64_t start = node_value(node, i);
                    std::uint64_t end = node_value(node, i + 1);
                    if (end < start || start > dst.length || end > dst.length) {
                        en.stats.drop_bad_index++;
                        break;
                    }
                    end = std::min(end, start + cfg_.max_range);
                    if (end > start)
                        push_candidate(engine,
                                       {dst.node_id, start, end, ent.gpe_id,
                                        ent.chain_depth + 1},
                                       end - start);
                    break;
                }
                case DigEdgeKind::SingleValued: {
                    const std::uint64_t v = node_value(node, i);
                    if (v >= dst.length) {
                        en.stats.drop_bad_index++;
                        break;
                    }
                    push_candidate(engine,
                                   {dst.node_id, v, v + 1, ent.gpe_id,
                                    ent.chain_depth + 1},
                                   1);
                    break;
                }
                case DigEdgeKind::SameIndex:
                    // handled once per covered span below
                    break;
            }
        }
    }
    if (i1 > i0) {
        for (const DigEdge& edge : dig_->edges) {
            if (edge.src != ent.node_id || edge.kind != DigEdgeKind::SameIndex)
                continue;
            const DigNode& dst = dig_->nodes[edge.dst];
            const std::uint64_t end = std::min(i1, dst.length);
            if (end > i0)
                push_candidate(engine,
                               {dst.node_id, i0, end, ent.gpe_id, ent.chain_depth + 1},
                               end - i0);
        }
    }

    if (i1 < ent.range_end && i1 < node.length && !draining_) {
        // More of the span lies in later blocks: advance and re-route.
        ent.elem_index = i1;
        ent.issued_block = block_of(node, i1);
        ent.in_flight = false;
        route_and_enqueue(engine, h, ent.issued_block, cycle);
    } else {
        pfhr_.release(h, FusedPfhrArray::ReleaseReason::Retired);
    }
}

void TilePrefetcher::execute_fill_match(std::uint32_t engine, std::uint32_t bank,
                                        BlockAddr block, Cycle cycle) {
    Engine& en = engines_[engine];
    auto matches = pfhr_.match_block(engine, block);
    for (const EntryHandle& h : matches)
        if (h.bank == bank) process_entry_fill(engine, h, block, cycle);

    // Matches in other banks (rare) keep the op queued for another grant.
    bool remaining = false;
    for (const EntryHandle& h : pfhr_.match_block(engine, block))
        if (pfhr_.handle_valid(h)) remaining = true;
    if (!remaining) en.fill_ops.pop_front();
}

void TilePrefetcher::execute_alloc(std::uint32_t engine, std::uint32_t bank,
                                   Cycle cycle) {
    Engine& en = engines_[engine];
    PendingAlloc c = en.alloc_ops.front();
    en.alloc_ops.pop_front();

    // Another engine may have allocated the same target this cycle.
    if (pfhr_.duplicate_exists(engine, c.node_id, c.elem_begin)) {
        en.stats.drop_refresh++;
        return;
    }

    EntryHandle slot{};
    bool have_slot = false;
    for (std::uint32_t s = 0; s < pfhr_.bank_capacity() && !have_slot; ++s) {
        if (!pfhr_.banks_[bank][s].valid) {
            slot = EntryHandle{static_cast<std::uint16_t>(bank),
                               static_cast<std::uint16_t>(s),
                               pfhr_.banks_[bank][s].version};
            have_slot = true;
        }
    }
    if (!have_slot) {
        auto victim = pfhr_.squash_victim(engine, c.gpe);
        if (!victim || victim->bank != bank) {
            en.alloc_ops.push_front(c);  // plan went stale; retry next cycle
            return;
        }
        if (log_) log_->squashes.push_back({cycle, c.gpe, pfhr_.at(*victim).gpe_id});
        pfhr_.release(*victim, FusedPfhrArray::ReleaseReason::Squashed, c.gpe);
        slot = EntryHandle{victim->bank, victim->slot, pfhr_.at(*victim).version};
    }

    const DigNode& node = dig_->nodes[c.node_id];
    PfhrEntry& e = pfhr_.banks_[slot.bank][slot.slot];
    e.valid = true;
    e.in_flight = false;
    e.gpe_id = c.gpe;
    e.node_id = c.node_id;
    e.elem_index = c.elem_begin;
    e.range_end = c.elem_end;
    e.chain_depth = c.depth;
    e.issued_block = block_of(node, c.elem_begin);
    e.alloc_cycle = cycle;
    slot.version = e.version;
    pfhr_.stats.allocs++;

    route_and_enqueue(engine, slot, e.issued_block, cycle);
}

void TilePrefetcher::drain_engine(std::uint32_t e) {
    Engine& en = engines_[e];
    en.stats.drop_run_end += en.alloc_ops.size();
    en.alloc_ops.clear();
    for (const IssueItem& it : en.issue_q) {
        if (pfhr_.handle_valid(it.entry))
            pfhr_.release(it.entry, FusedPfhrArray::ReleaseReason::Dropped);
        en.stats.drop_run_end++;
    }
    en.issue_q.clear();
    en.foreign_in_q = 0;
    while (!en.fill_ops.empty()) {
        auto matches = pfhr_.match_block(e, en.fill_ops.front());
        if (matches.empty()) en.stats.orphan_fills++;
        for (const EntryHandle& h : matches)
            pfhr_.release(h, FusedPfhrArray::ReleaseReason::Retired);
        en.fill_ops.pop_front();
    }
}

void TilePrefetcher::tick(Cycle cycle, const IssueFn& try_issue) {
    if (!cfg_.enabled) return;
    if (draining_) {
        for (std::uint32_t e = 0; e < engines_.size(); ++e) drain_engine(e);
        return;
    }

    // 1. One PFHR request per busy engine (fill matching has priority).
    struct Req {
        std::uint32_t engine;
        std::uint32_t bank;
        bool is_fill;
        BlockAddr block;
    };
    std::vector<Req> reqs;
    for (std::uint32_t e = 0; e < engines_.size(); ++e) {
        Engine& en = engines_[e];
        bool requested = false;
        while (!en.fill_ops.empty() && !requested) {
            auto matches = pfhr_.match_block(e, en.fill_ops.front());
            if (matches.empty()) {
                en.stats.orphan_fills++;
                en.fill_ops.pop_front();
            } else {
                reqs.push_back({e, matches[0].bank, true, en.fill_ops.front()});
                requested = true;
            }
        }
        while (!en.alloc_ops.empty() && !requested) {
            const PendingAlloc& c = en.alloc_ops.front();
            if (pfhr_.duplicate_exists(e, c.node_id, c.elem_begin)) {
                en.stats.drop_refresh++;
                en.alloc_ops.pop_front();
                continue;
            }
            if (auto free = pfhr_.find_free(e)) {
                reqs.push_back({e, free->bank, false, 0});
                requested = true;
            } else if (auto victim = pfhr_.squash_victim(e, c.gpe)) {
                reqs.push_back({e, victim->bank, false, 0});
                requested = true;
            } else {
                en.stats.drop_pfhr_alloc_fail++;
                pfhr_.stats.alloc_fails++;
                en.alloc_ops.pop_front();
            }
        }
    }

    // 2. Round-robin bank grants.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(reqs.size());
    for (const Req& r : reqs) pairs.emplace_back(r.engine, r.bank);
    auto grants = pfhr_arbitrate(pairs, pfhr_.num_banks(), cycle, pfhr_.fused());

    // 3. Granted engines perform their operation.
    for (const auto& [engine, bank] : grants) {
        const Req* req = nullptr;
        for (const Req& r : reqs)
            if (r.engine == engine && r.bank == bank) {
                req = &r;
                break;
            }
        engines_[engine].stats.pfhr_ops++;
        pfhr_.stats.accesses++;
        if (log_) log_->pfhr_accesses.push_back({cycle, tile_id_, bank});
        if (req->is_fill)
            execute_fill_match(engine, bank, req->block, cycle);
        else
            execute_alloc(engine, bank, cycle);
    }

    // 4. At most one prefetch issue attempt per engine.
    for (std::uint32_t e = 0; e < engines_.size(); ++e) {
        Engine& en = engines_[e];
        bool port_done = false;
        while (!en.issue_q.empty() && !port_done) {
            IssueItem& it = en.issue_q.front();
            if (it.ready > cycle) break;
            if (!pfhr_.handle_valid(it.entry) ||
                pfhr_.at(it.entry).issued_block != it.block ||
                pfhr_.at(it.entry).in_flight) {
                en.stats.drop_stale++;
                if (it.foreign) en.foreign_in_q--;
                en.issue_q.pop_front();
                continue;
            }
            switch (try_issue(e, it.block, cycle)) {
                case PfIssueResult::PortBusy:
                case PfIssueResult::MshrFull:
                    port_done = true;  // retry next cycle
                    break;
                case PfIssueResult::Issued:
                    pfhr_.at(it.entry).in_flight = true;
                    en.stats.issued++;
                    if (it.foreign) en.foreign_in_q--;
                    en.issue_q.pop_front();
                    port_done = true;
                    break;
                case PfIssueResult::Merged:
                    pfhr_.at(it.entry).in_flight = true;
                    en.stats.merged++;
                    if (it.foreign) en.foreign_in_q--;
                    en.issue_q.pop_front();
                    port_done = true;
                    break;
                case PfIssueResult::Redundant:
                    // Data already present: continue the chain from the cache.
                    en.stats.redundant_hit++;
                    en.fill_ops.push_back(it.block);
                    if (it.foreign) en.foreign_in_q--;
                    en.issue_q.pop_front();
                    port_done = true;
                    break;
            }
        }
    }
}

bool TilePrefetcher::idle() const {
    for (const Engine& e : engines_)
        if (!e.alloc_ops.empty() || !e.fill_ops.empty() || !e.issue_q.empty())
            return false;
    return true;
}

void TilePrefetcher::reset_for_reconfigure() {
    for (Engine& e : engines_) {
        e.alloc_ops.clear();
        e.fill_ops.clear();
        e.issue_q.clear();
        e.foreign_in_q = 0;
    }
    pfhr_.invalidate_all();
}

} // namespace tmsim
