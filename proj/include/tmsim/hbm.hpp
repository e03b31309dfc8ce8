#pragma once
#include <cstdint>
#include <vector>

#include "tmsim/cache.hpp"
#include "tmsim/rng.hpp"

namespace tmsim {

// HBM stack as pseudo-channels: a channel moves one block at a time
// (occupancy cycles each) and a seeded uniform draw in [lat_min, lat_max]
// models the access latency.
class HbmModel {
public:
    HbmModel() : rng_(0) {}
    HbmModel(std::uint32_t channels, std::uint32_t lat_min, std::uint32_t lat_max,
             std::uint32_t occupancy, std::uint64_t seed)
        : channels_(channels), lat_min_(lat_min), lat_max_(lat_max),
          occupancy_(occupancy), rng_(seed) {
        if (channels_ == 0) throw ValidationError("hbm: channels must be >= 1");
        if (lat_max_ < lat_min_) throw ValidationError("hbm: lat_max < lat_min");
        channel_free_.assign(channels_, 0);
    }

    // Read request: returns the fill-completion cycle.
    // completion = max(channel_free, cycle) + occupancy + latency_draw
    Cycle request(BlockAddr block, Cycle cycle) {
        const std::uint32_t ch = static_cast<std::uint32_t>(block % channels_);
        const Cycle start = std::max(channel_free_[ch], cycle);
        channel_free_[ch] = start + occupancy_;
        ++blocks_transferred_;
        return start + occupancy_ + rng_.next_range(lat_min_, lat_max_);
    }

    // Posted write (writeback): occupies the channel, nothing waits on it.
    void posted_write(BlockAddr block, Cycle cycle) {
        const std::uint32_t ch = static_cast<std::uint32_t>(block % channels_);
        channel_free_[ch] = std::max(channel_free_[ch], cycle) + occupancy_;
        ++blocks_transferred_;
    }

    std::uint64_t blocks_transferred() const { return blocks_transferred_; }
    std::uint32_t channels() const { return channels_; }

private:
    std::uint32_t channels_ = 16;
    std::uint32_t lat_min_ = 80;
    std::uint32_t lat_max_ = 150;
    std::uint32_t occupancy_ = 8;
    Rng rng_;
    std::vector<Cycle> channel_free_;
    std::uint64_t blocks_transferred_ = 0;
};

} // namespace tmsim
