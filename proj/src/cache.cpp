#include "tmsim/cache.hpp"

#include <string>

namespace tmsim {

void CacheConfig::validate(const char* what) const {
    auto fail = [&](const std::string& msg) {
        throw ValidationError(std::string(what) + ": " + msg);
    };
    if (block_bytes == 0 || (block_bytes & (block_bytes - 1)) != 0)
        fail("block size must be a power of two");
    if (assoc == 0) fail("associativity must be >= 1");
    if (size_bytes == 0 || size_bytes % (assoc * block_bytes) != 0)
        fail("size must be divisible by assoc * block size");
    if (mshr_count == 0) fail("mshr count must be >= 1");
    if (ports == 0) fail("port count must be >= 1");
}

CacheBank::CacheBank(const CacheConfig& cfg, std::uint32_t bank_id,
                     std::uint32_t index_stride)
    : cfg_(cfg), bank_id_(bank_id), index_stride_(index_stride ? index_stride : 1) {
    cfg_.validate("cache config");
    lines_.resize(static_cast<std::size_t>(cfg_.num_sets()) * cfg_.assoc);
    mshrs_.resize(cfg_.mshr_count);
}

void CacheBank::set_index_stride(std::uint32_t stride) {
    for (const Line& l : lines_)
        if (l.valid) throw ValidationError("index stride change with resident lines");
    index_stride_ = stride ? stride : 1;
}

int CacheBank::find_line(BlockAddr block) const {
    const std::uint32_t set = set_of(block);
    const std::size_t base = static_cast<std::size_t>(set) * cfg_.assoc;
    for (std::uint32_t w = 0; w < cfg_.assoc; ++w)
        if (lines_[base + w].valid && lines_[base + w].tag == block)
            return static_cast<int>(base + w);
    return -1;
}

int CacheBank::find_mshr(BlockAddr block) const {
    for (std::size_t i = 0; i < mshrs_.size(); ++i)
        if (mshrs_[i].valid && mshrs_[i].block == block) return static_cast<int>(i);
    return -1;
}

bool CacheBank::resident(BlockAddr block) const { return find_line(block) >= 0; }

std::uint32_t CacheBank::live_mshrs() const {
    std::uint32_t n = 0;
    for (const auto& m : mshrs_) n += m.valid ? 1 : 0;
    return n;
}

std::uint32_t CacheBank::victim_way(std::uint32_t set) const {
    const std::size_t base = static_cast<std::size_t>(set) * cfg_.assoc;
    std::uint32_t victim = 0;
    std::uint64_t oldest = UINT64_MAX;
    for (std::uint32_t w = 0; w < cfg_.assoc; ++w) {
        const Line& l = lines_[base + w];
        if (!l.valid) return w;
        if (l.lru_stamp < oldest) {
            oldest = l.lru_stamp;
            victim = w;
        }
    }
    return victim;
}

AccessOutcome CacheBank::access_demand(BlockAddr block, bool is_store,
                                       std::uint32_t gpe, Cycle cycle) {
    int li = find_line(block);
    if (li >= 0) {
        Line& l = lines_[static_cast<std::size_t>(li)];
        touch(l);
        if (l.prefetch_bit && !l.used_bit) stats.prefetch_fills_used++;
        l.used_bit = true;
        if (is_store) l.dirty = true;
        stats.accesses++;
        stats.hits++;
        return AccessOutcome::Hit;
    }
    int mi = find_mshr(block);
    if (mi >= 0) {
        Mshr& m = mshrs_[static_cast<std::size_t>(mi)];
        if (is_store)
            m.has_store = true;
        else
            m.load_waiters.push_back(gpe);
        stats.accesses++;
        stats.misses++;
        return AccessOutcome::MissMerged;
    }
    for (auto& m : mshrs_) {
        if (!m.valid) {
            m.valid = true;
            m.block = block;
            m.is_prefetch = false;
            m.has_store = is_store;
            m.load_waiters.clear();
            if (!is_store) m.load_waiters.push_back(gpe);
            m.alloc_cycle = cycle;
            stats.accesses++;
            stats.misses++;
            stats.mshr_allocs++;
            return AccessOutcome::MissAllocated;
        }
    }
    stats.blocked_mshr++;
    return AccessOutcome::BlockedMshr;
}

AccessOutcome CacheBank::probe_prefetch(BlockAddr block, Cycle cycle) {
    stats.pf_probes++;
    if (find_line(block) >= 0) return AccessOutcome::Hit;
    if (find_mshr(block) >= 0) return AccessOutcome::MissMerged;
    for (auto& m : mshrs_) {
        if (!m.valid) {
            m.valid = true;
            m.block = block;
            m.is_prefetch = true;
            m.has_store = false;
            m.load_waiters.clear();
            m.alloc_cycle = cycle;
            stats.mshr_allocs++;
            return AccessOutcome::MissAllocated;
        }
    }
    return AccessOutcome::BlockedMshr;
}

bool CacheBank::writeback_probe(BlockAddr block) {
    stats.wb_in++;
    int li = find_line(block);
    if (li < 0) return false;
    Line& l = lines_[static_cast<std::size_t>(li)];
    l.dirty = true;
    touch(l);
    return true;
}

FillResult CacheBank::fill(BlockAddr block, Cycle) {
    FillResult res;
    int mi = find_mshr(block);
    // every fill must retire an outstanding miss
    if (mi < 0) throw SimAbort("fill without matching MSHR");
    Mshr& m = mshrs_[static_cast<std::size_t>(mi)];

    const std::uint32_t set = set_of(block);
    const std::size_t base = static_cast<std::size_t>(set) * cfg_.assoc;
    const std::uint32_t way = victim_way(set);
    Line& l = lines_[base + way];
    if (l.valid) {
        stats.replacements++;
        if (l.prefetch_bit && !l.used_bit) stats.prefetch_fills_evicted_unused++;
        res.evicted_valid = true;
        res.evicted_dirty = l.dirty;
        res.evicted_block = l.tag;
        if (l.dirty) stats.writebacks++;
    }
    l.valid = true;
    l.tag = block;
    l.dirty = m.has_store;
    l.prefetch_bit = m.is_prefetch;
    // A line whose fill already has demand waiters counts as used on arrival.
    l.used_bit = !m.is_prefetch || !m.load_waiters.empty() || m.has_store;
    touch(l);

    stats.fills++;
    if (m.is_prefetch) {
        stats.prefetch_fills++;
        if (!m.load_waiters.empty() || m.has_store) stats.prefetch_fills_used++;
    }
    res.load_waiters = std::move(m.load_waiters);
    res.was_prefetch = m.is_prefetch;
    m.valid = false;
    return res;
}

void CacheBank::invalidate_all(std::vector<BlockAddr>* dirty_out) {
    for (auto& l : lines_) {
        if (!l.valid) continue;
        if (l.dirty) {
            stats.writebacks++;
            if (dirty_out) dirty_out->push_back(l.tag);
        }
        if (l.prefetch_bit && !l.used_bit) stats.prefetch_fills_evicted_unused++;
        l = Line{};
    }
}

} // namespace tmsim
