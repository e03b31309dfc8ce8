#pragma once
#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <vector>

namespace tmsim {

using Addr = std::uint64_t;

// The four data-structure arrays every kernel lays out. Stable ids: the DIG
// and the trace decoder both key on them.
enum class ArrayId : std::uint8_t { Offsets = 0, Neighbors = 1, Weights = 2, Prop = 3 };
constexpr std::size_t kNumArrays = 4;
inline const char* array_name(ArrayId id) {
    static const char* names[kNumArrays] = {"OFFSETS", "NEIGHBORS", "WEIGHTS", "PROP"};
    return names[static_cast<std::size_t>(id)];
}

struct Region {
    ArrayId id{};
    Addr base = 0;          // block-aligned
    std::uint32_t elem_size = 0;
    std::uint64_t length = 0;  // element count
    std::vector<std::uint8_t> payload;  // length * elem_size bytes

    Addr end() const { return base + length * elem_size; }
    Addr elem_addr(std::uint64_t i) const { return base + i * elem_size; }
};

// Flat 64-bit address space holding the kernel's arrays as disjoint,
// block-aligned regions. Payloads are the functional memory contents; the
// prefetcher dereferences OFFSETS/NEIGHBORS values through them.
struct MemoryImage {
    std::uint32_t block_size = 64;
    std::array<Region, kNumArrays> regions;

    const Region& region(ArrayId id) const {
        return regions[static_cast<std::size_t>(id)];
    }
    Region& region(ArrayId id) { return regions[static_cast<std::size_t>(id)]; }

    // Region containing addr, or nullopt for a wild address.
    std::optional<ArrayId> locate(Addr addr) const {
        for (const auto& r : regions)
            if (r.length > 0 && addr >= r.base && addr < r.end()) return r.id;
        return std::nullopt;
    }

    std::uint64_t elem_index(ArrayId id, Addr addr) const {
        const Region& r = region(id);
        return (addr - r.base) / r.elem_size;
    }

    std::uint64_t read_u64(ArrayId id, std::uint64_t i) const {
        const Region& r = region(id);
        std::uint64_t v;
        std::memcpy(&v, r.payload.data() + i * sizeof v, sizeof v);
        return v;
    }
    std::uint32_t read_u32(ArrayId id, std::uint64_t i) const {
        const Region& r = region(id);
        std::uint32_t v;
        std::memcpy(&v, r.payload.data() + i * sizeof v, sizeof v);
        return v;
    }
    float read_f32(ArrayId id, std::uint64_t i) const {
        const Region& r = region(id);
        float v;
        std::memcpy(&v, r.payload.data() + i * sizeof v, sizeof v);
        return v;
    }
};

struct Graph;

// Allocates contiguous block-aligned regions for OFFSETS (8B), NEIGHBORS (4B),
// WEIGHTS (4B) and PROP (4B per vertex), payloads filled from the graph.
// PROP starts zeroed; kernels overwrite it with their own initial values.
MemoryImage layout_graph(const Graph& g, std::uint32_t block_size);

} // namespace tmsim
