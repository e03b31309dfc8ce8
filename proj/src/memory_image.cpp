#include "tmsim/memory_image.hpp"

#include <algorithm>
#include <cstring>

#include "tmsim/graph.hpp"

namespace tmsim {

namespace {

Addr align_up(Addr a, std::uint64_t alignment) {
    return (a + alignment - 1) / alignment * alignment;
}

template <typename T>
std::vector<std::uint8_t> to_bytes(const std::vector<T>& v) {
    std::vector<std::uint8_t> out(v.size() * sizeof(T));
    if (!v.empty()) std::memcpy(out.data(), v.data(), out.size());
    return out;
}

} // namespace

MemoryImage layout_graph(const Graph& g, std::uint32_t block_size) {
    MemoryImage img;
    img.block_size = block_size;

    const std::uint64_t n = g.num_vertices;
    const std::uint64_t m = g.num_edges;

    // Regions are aligned to 4 KiB so they never share a cache block for any
    // power-of-two block size up to that, regardless of the configured size.
    const std::uint64_t alignment = std::max<std::uint64_t>(block_size, 4096);

    Addr cursor = 0;
    auto place = [&](ArrayId id, std::uint32_t elem_size, std::uint64_t length,
                     std::vector<std::uint8_t> payload) {
        Region& r = img.region(id);
        r.id = id;
        r.elem_size = elem_size;
        r.length = length;
        r.base = align_up(cursor, alignment);
        r.payload = std::move(payload);
        cursor = align_up(r.end(), alignment);
    };

    place(ArrayId::Offsets, 8, n + 1, to_bytes(g.col_ptr));
    place(ArrayId::Neighbors, 4, m, to_bytes(g.row_idx));
    place(ArrayId::Weights, 4, m, to_bytes(g.edge_weight));
    place(ArrayId::Prop, 4, n, std::vector<std::uint8_t>(n * 4, 0));
    return img;
}

} // namespace tmsim
