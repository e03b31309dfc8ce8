#pragma once
#include <cstdint>
#include <vector>

#include "tmsim/memory_image.hpp"

namespace tmsim {

// Indirection edge kinds:
//   Ranged      — consecutive source elements (val[i], val[i+1]) bound an
//                 index range into the destination array.
//   SingleValued— each loaded source value is itself an index into the
//                 destination array.
//   SameIndex   — destination element shares the source element's index.
enum class DigEdgeKind : std::uint8_t { SingleValued, Ranged, SameIndex };

struct DigEdge {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    DigEdgeKind kind = DigEdgeKind::SingleValued;
};

struct DigNode {
    std::uint32_t node_id = 0;
    ArrayId array{};
    Addr base = 0;
    std::uint64_t length = 0;
    std::uint32_t elem_size = 0;
    bool is_trigger = false;
};

// The data indirection graph programming the prefetch engines: nodes describe
// array regions, edges describe how loaded values index into other arrays.
struct Dig {
    std::vector<DigNode> nodes;
    std::vector<DigEdge> edges;

    std::vector<std::uint32_t> out_edges(std::uint32_t node_id) const {
        std::vector<std::uint32_t> out;
        for (std::uint32_t e = 0; e < edges.size(); ++e)
            if (edges[e].src == node_id) out.push_back(e);
        return out;
    }
};

} // namespace tmsim
