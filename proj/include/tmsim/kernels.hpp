#pragma once
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tmsim/dig.hpp"
#include "tmsim/graph.hpp"
#include "tmsim/memory_image.hpp"
#include "tmsim/memref.hpp"

namespace tmsim {

enum class KernelKind : std::uint8_t { PageRank, Bfs, Sssp };
const char* kernel_name(KernelKind k);
KernelKind kernel_from_name(const std::string& name);

constexpr std::uint32_t kUnreachedDist = std::numeric_limits<std::uint32_t>::max();
constexpr float kUnreachedCost = std::numeric_limits<float>::max();

// Contiguous block partition: GPE k owns [k*ceil(n/G), min(n, (k+1)*ceil(n/G))).
struct VertexPartition {
    std::uint64_t n = 0;
    std::uint32_t num_gpes = 1;
    std::uint64_t block = 0;  // ceil(n / num_gpes), 0 when n == 0

    std::uint64_t begin(std::uint32_t g) const {
        return std::min(n, static_cast<std::uint64_t>(g) * block);
    }
    std::uint64_t end(std::uint32_t g) const {
        return std::min(n, (static_cast<std::uint64_t>(g) + 1) * block);
    }
    std::uint32_t owner(std::uint64_t v) const {
        return block == 0 ? 0 : static_cast<std::uint32_t>(v / block);
    }
};

VertexPartition partition_vertices(std::uint64_t n, std::uint32_t num_gpes);

struct KernelParams {
    double damping = 0.85;    // pagerank
    std::uint32_t iters = 10; // pagerank
    Vertex source = 0;        // bfs / sssp
    std::uint16_t load_gap = 1;
    std::uint16_t store_gap = 4;
};

// A kernel execution: the functional result plus the per-GPE reference
// streams (segmented by iteration barriers), the memory image they address,
// and the DIG programming the prefetcher. Streams replay to exactly the
// functional result; property updates take effect at the iteration barrier.
struct KernelRun {
    KernelKind kernel = KernelKind::PageRank;
    Graph graph;
    std::uint32_t num_gpes = 1;
    VertexPartition partition;
    KernelParams params;
    MemoryImage image;
    Dig dig;

    // streams[gpe][segment] -> ordered refs; all GPEs have equal segment count
    std::vector<std::vector<std::vector<MemRef>>> streams;

    std::vector<double> result_rank;     // pagerank
    std::vector<std::uint32_t> result_dist;  // bfs (kUnreachedDist when unreached)
    std::vector<double> result_cost;     // sssp (+inf when unreached)

    std::uint64_t total_refs() const;
    std::uint64_t result_checksum() const;
};

KernelRun run_pagerank(const Graph& g, std::uint32_t num_gpes, double damping,
                       std::uint32_t iters, const KernelParams& base = {});
KernelRun run_bfs(const Graph& g, std::uint32_t num_gpes, Vertex source,
                  const KernelParams& base = {});
KernelRun run_sssp(const Graph& g, std::uint32_t num_gpes, Vertex source,
                   const KernelParams& base = {});

KernelRun run_kernel(KernelKind kind, const Graph& g, std::uint32_t num_gpes,
                     const KernelParams& params);

// Hand-constructed DIG per kernel: OFFSETS is the trigger node; a ranged edge
// OFFSETS->NEIGHBORS, a single-valued edge NEIGHBORS->PROP, and for SSSP a
// same-index edge NEIGHBORS->WEIGHTS.
Dig build_dig(KernelKind kernel, const MemoryImage& image);

// Binary trace dump (debugging): header "MTRC", version u32, record count
// u64, then {address u64, gpe u32, kind u32, compute_gap u32, segment u32}.
void dump_trace(const KernelRun& kr, const std::string& path);

} // namespace tmsim
