#pragma once
#include <cstdint>

namespace tmsim {

enum class AccessKind : std::uint8_t { Load = 0, Store = 1 };

// One memory reference in a per-GPE stream. compute_gap is the core work
// (in cycles) preceding the reference.
struct MemRef {
    std::uint64_t address = 0;
    std::uint16_t gpe_id = 0;
    AccessKind kind = AccessKind::Load;
    std::uint8_t _pad = 0;
    std::uint16_t compute_gap = 0;
    std::uint16_t _pad2 = 0;
};
static_assert(sizeof(MemRef) == 16);

} // namespace tmsim
