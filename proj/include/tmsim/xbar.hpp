#pragma once
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "tmsim/cache.hpp"
#include "tmsim/event_log.hpp"

namespace tmsim {

enum class PacketKind : std::uint8_t { Read, Writeback };

struct XbarPacket {
    BlockAddr block = 0;
    std::uint16_t src = 0;   // input port (L1 bank id)
    std::uint16_t dst = 0;   // output port (L2 bank id)
    PacketKind kind = PacketKind::Read;
    bool is_prefetch = false;
};

struct XbarWindow {
    std::uint64_t queued = 0;
    std::uint64_t through = 0;
};

// Input-queued crossbar with per-output-port serialization: each output
// delivers at most one packet per cycle, round-robin over the input queues
// whose heads target it. A head that loses while another packet wins its
// port counts one queued event for that cycle.
class Xbar {
public:
    Xbar() = default;
    Xbar(std::uint32_t inputs, std::uint32_t outputs, std::uint32_t window_cycles);

    void enqueue(const XbarPacket& p);
    bool empty() const { return occupancy_ == 0; }
    std::uint64_t occupancy() const { return occupancy_; }

    // Delivers up to one packet per output. `accept` returns false when the
    // destination cannot take the packet this cycle (it stays queued).
    void tick(Cycle cycle, const std::function<bool(const XbarPacket&, Cycle)>& accept);

    std::uint64_t total_queued() const { return total_queued_; }
    std::uint64_t total_through() const { return total_through_; }
    std::uint64_t total_blocked() const { return total_blocked_; }

    // Per-window (queued, through) pairs in window order, final partial
    // window included.
    std::vector<XbarWindow> windows() const;

    void set_event_log(EventLog* log) { log_ = log; }

private:
    void note_queued(Cycle cycle, std::uint64_t n);
    void note_through(Cycle cycle);
    XbarWindow& window_at(Cycle cycle);

    std::uint32_t inputs_ = 0;
    std::uint32_t outputs_ = 0;
    std::uint32_t window_cycles_ = 1000;
    std::vector<std::deque<XbarPacket>> queues_;
    std::vector<std::uint32_t> rr_next_;  // per output, next input to consider
    std::uint64_t occupancy_ = 0;
    std::uint64_t total_queued_ = 0;
    std::uint64_t total_through_ = 0;
    std::uint64_t total_blocked_ = 0;
    EventLog* log_ = nullptr;
    std::vector<std::pair<std::uint64_t, XbarWindow>> window_log_;  // (window idx, counts)

    // scratch reused across ticks
    std::vector<std::vector<std::uint32_t>> candidates_;
    std::vector<std::uint32_t> active_outputs_;
};

} // namespace tmsim
