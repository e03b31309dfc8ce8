#include "tmsim/xbar.hpp"

#include <algorithm>

namespace tmsim {

Xbar::Xbar(std::uint32_t inputs, std::uint32_t outputs, std::uint32_t window_cycles)
    : inputs_(inputs), outputs_(outputs), window_cycles_(window_cycles) {
    queues_.resize(inputs);
    rr_next_.assign(outputs, 0);
    candidates_.resize(outputs);
}

void Xbar::enqueue(const XbarPacket& p) {
    queues_[p.src].push_back(p);
    ++occupancy_;
}

XbarWindow& Xbar::window_at(Cycle cycle) {
    const std::uint64_t w = window_cycles_ ? cycle / window_cycles_ : 0;
    if (window_log_.empty() || window_log_.back().first != w)
        window_log_.emplace_back(w, XbarWindow{});
    return window_log_.back().second;
}

void Xbar::note_queued(Cycle cycle, std::uint64_t n) {
    if (n == 0) return;
    total_queued_ += n;
    window_at(cycle).queued += n;
}

void Xbar::note_through(Cycle cycle) {
    ++total_through_;
    window_at(cycle).through++;
}

void Xbar::tick(Cycle cycle, const std::function<bool(const XbarPacket&, Cycle)>& accept) {
    if (occupancy_ == 0) return;

    // Bucket queue heads by target output.
    active_outputs_.clear();
    for (std::uint32_t in = 0; in < inputs_; ++in) {
        if (queues_[in].empty()) continue;
        const std::uint32_t out = queues_[in].front().dst;
        if (candidates_[out].empty()) active_outputs_.push_back(out);
        candidates_[out].push_back(in);
    }
    std::sort(active_outputs_.begin(), active_outputs_.end());

    for (std::uint32_t out : active_outputs_) {
        auto& cand = candidates_[out];
        // Round-robin: start scanning after the last winner.
        std::sort(cand.begin(), cand.end());
        std::uint32_t start = 0;
        for (std::uint32_t i = 0; i < cand.size(); ++i)
            if (cand[i] >= rr_next_[out]) {
                start = i;
                break;
            }
        bool delivered = false;
        for (std::uint32_t k = 0; k < cand.size() && !delivered; ++k) {
            const std::uint32_t in = cand[(start + k) % cand.size()];
            const XbarPacket& p = queues_[in].front();
            if (accept(p, cycle)) {
                queues_[in].pop_front();
                --occupancy_;
                note_through(cycle);
                note_queued(cycle, cand.size() - 1);
                if (log_)
                    log_->xbar_deliveries.push_back(
                        {cycle, static_cast<std::uint32_t>(cand.size() - 1)});
                rr_next_[out] = (in + 1) % inputs_;
                delivered = true;
            } else {
                ++total_blocked_;
            }
        }
        cand.clear();
    }
}

std::vector<XbarWindow> Xbar::windows() const {
    std::vector<XbarWindow> out;
    out.reserve(window_log_.size());
    for (const auto& [idx, w] : window_log_) out.push_back(w);
    return out;
}

} // namespace tmsim
