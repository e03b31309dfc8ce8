#include "tmsim/kernels.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "tmsim/errors.hpp"

namespace tmsim {

const char* kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::PageRank: return "pagerank";
        case KernelKind::Bfs: return "bfs";
        case KernelKind::Sssp: return "sssp";
    }
    return "?";
}

KernelKind kernel_from_name(const std::string& name) {
    if (name == "pagerank" || name == "pr") return KernelKind::PageRank;
    if (name == "bfs") return KernelKind::Bfs;
    if (name == "sssp") return KernelKind::Sssp;
    throw ValidationError("unknown kernel: " + name);
}

VertexPartition partition_vertices(std::uint64_t n, std::uint32_t num_gpes) {
    if (num_gpes < 1) throw ValidationError("partition: num_gpes must be >= 1");
    VertexPartition p;
    p.n = n;
    p.num_gpes = num_gpes;
    p.block = n == 0 ? 0 : (n + num_gpes - 1) / num_gpes;
    return p;
}

std::uint64_t KernelRun::total_refs() const {
    std::uint64_t total = 0;
    for (const auto& gpe : streams)
        for (const auto& seg : gpe) total += seg.size();
    return total;
}

std::uint64_t KernelRun::result_checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const void* data, std::size_t len) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(result_rank.data(), result_rank.size() * sizeof(double));
    mix(result_dist.data(), result_dist.size() * sizeof(std::uint32_t));
    mix(result_cost.data(), result_cost.size() * sizeof(double));
    return h;
}

namespace {

// Appends refs into per-GPE, per-segment streams. A segment boundary is an
// iteration barrier.
class Emitter {
public:
    Emitter(KernelRun& kr) : kr_(kr) {
        kr_.streams.assign(kr_.num_gpes, {});
    }
    void begin_segment() {
        for (auto& gpe : kr_.streams) gpe.emplace_back();
    }
    void load(std::uint32_t gpe, Addr addr) {
        kr_.streams[gpe].back().push_back(
            {addr, static_cast<std::uint16_t>(gpe), AccessKind::Load, 0,
             kr_.params.load_gap, 0});
    }
    void store(std::uint32_t gpe, Addr addr) {
        kr_.streams[gpe].back().push_back(
            {addr, static_cast<std::uint16_t>(gpe), AccessKind::Store, 0,
             kr_.params.store_gap, 0});
    }

private:
    KernelRun& kr_;
};

KernelRun make_run(KernelKind kind, const Graph& g, std::uint32_t num_gpes,
                   const KernelParams& params) {
    validate_graph(g);
    KernelRun kr;
    kr.kernel = kind;
    kr.graph = g;
    kr.num_gpes = num_gpes;
    kr.params = params;
    kr.partition = partition_vertices(g.num_vertices, num_gpes);
    kr.image = layout_graph(g, 64);
    return kr;
}

void set_prop_payload_u32(MemoryImage& img, const std::vector<std::uint32_t>& vals) {
    auto& r = img.region(ArrayId::Prop);
    std::memcpy(r.payload.data(), vals.data(), vals.size() * 4);
}

void set_prop_payload_f32(MemoryImage& img, const std::vector<float>& vals) {
    auto& r = img.region(ArrayId::Prop);
    std::memcpy(r.payload.data(), vals.data(), vals.size() * 4);
}

} // namespace

KernelRun run_pagerank(const Graph& g, std::uint32_t num_gpes, double damping,
                       std::uint32_t iters, const KernelParams& base) {
    if (!(damping > 0.0 && damping < 1.0))
        throw ValidationError("pagerank: damping must lie in (0,1)");
    if (iters < 1) throw ValidationError("pagerank: iters must be >= 1");

    KernelParams params = base;
    params.damping = damping;
    params.iters = iters;
    KernelRun kr = make_run(KernelKind::PageRank, g, num_gpes, params);
    const std::uint64_t n = g.num_vertices;

    // Out-degrees come from counting appearances in row_idx (precomputed by
    // the kernel before the timed region; not part of the streams).
    std::vector<std::uint64_t> outdeg(n, 0);
    for (Vertex u : g.row_idx) outdeg[u]++;

    std::vector<double> rank(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    set_prop_payload_f32(kr.image, std::vector<float>(n, n ? 1.0f / static_cast<float>(n) : 0.0f));
    kr.dig = build_dig(KernelKind::PageRank, kr.image);

    const Region& off = kr.image.region(ArrayId::Offsets);
    const Region& nei = kr.image.region(ArrayId::Neighbors);
    const Region& prop = kr.image.region(ArrayId::Prop);

    Emitter em(kr);
    std::vector<double> next(n, 0.0);
    for (std::uint32_t it = 0; it < iters; ++it) {
        em.begin_segment();
        for (std::uint32_t gpe = 0; gpe < num_gpes; ++gpe) {
            for (std::uint64_t v = kr.partition.begin(gpe); v < kr.partition.end(gpe); ++v) {
                em.load(gpe, off.elem_addr(v));
                em.load(gpe, off.elem_addr(v + 1));
                double acc = 0.0;
                for (EdgeOffset j = g.col_ptr[v]; j < g.col_ptr[v + 1]; ++j) {
                    Vertex u = g.row_idx[j];
                    em.load(gpe, nei.elem_addr(j));
                    em.load(gpe, prop.elem_addr(u));
                    if (outdeg[u] > 0)
                        acc += rank[u] / static_cast<double>(outdeg[u]);
                }
                next[v] = (1.0 - damping) / static_cast<double>(n) + damping * acc;
                em.store(gpe, prop.elem_addr(v));
            }
        }
        rank.swap(next);
    }
    kr.result_rank = std::move(rank);
    return kr;
}

KernelRun run_bfs(const Graph& g, std::uint32_t num_gpes, Vertex source,
                  const KernelParams& base) {
    if (source >= g.num_vertices) throw ValidationError("bfs: source out of range");

    KernelRun kr = make_run(KernelKind::Bfs, g, num_gpes, base);
    kr.params.source = source;
    const std::uint64_t n = g.num_vertices;

    std::vector<std::uint32_t> dist(n, kUnreachedDist);
    dist[source] = 0;
    set_prop_payload_u32(kr.image, dist);
    kr.dig = build_dig(KernelKind::Bfs, kr.image);

    const Region& off = kr.image.region(ArrayId::Offsets);
    const Region& nei = kr.image.region(ArrayId::Neighbors);
    const Region& prop = kr.image.region(ArrayId::Prop);

    Emitter em(kr);
    std::vector<std::uint32_t> old_dist;
    // Pull rounds: each unvisited vertex scans in-neighbors for one at the
    // current level, breaking on the first match. The final, no-change round
    // is part of the trace (that is how execution discovers termination).
    for (std::uint32_t level = 0;; ++level) {
        em.begin_segment();
        old_dist = dist;
        bool changed = false;
        for (std::uint32_t gpe = 0; gpe < num_gpes; ++gpe) {
            for (std::uint64_t v = kr.partition.begin(gpe); v < kr.partition.end(gpe); ++v) {
                if (old_dist[v] != kUnreachedDist) continue;
                em.load(gpe, off.elem_addr(v));
                em.load(gpe, off.elem_addr(v + 1));
                for (EdgeOffset j = g.col_ptr[v]; j < g.col_ptr[v + 1]; ++j) {
                    Vertex u = g.row_idx[j];
                    em.load(gpe, nei.elem_addr(j));
                    em.load(gpe, prop.elem_addr(u));
                    if (old_dist[u] == level) {
                        dist[v] = level + 1;
                        em.store(gpe, prop.elem_addr(v));
                        changed = true;
                        break;
                    }
                }
            }
        }
        if (!changed || level >= n) break;
    }
    kr.result_dist = std::move(dist);
    return kr;
}

KernelRun run_sssp(const Graph& g, std::uint32_t num_gpes, Vertex source,
                   const KernelParams& base) {
    if (source >= g.num_vertices) throw ValidationError("sssp: source out of range");

    KernelRun kr = make_run(KernelKind::Sssp, g, num_gpes, base);
    kr.params.source = source;
    const std::uint64_t n = g.num_vertices;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> cost(n, kInf);
    cost[source] = 0.0;
    {
        std::vector<float> prop0(n, kUnreachedCost);
        prop0[source] = 0.0f;
        set_prop_payload_f32(kr.image, prop0);
    }
    kr.dig = build_dig(KernelKind::Sssp, kr.image);

    const Region& off = kr.image.region(ArrayId::Offsets);
    const Region& nei = kr.image.region(ArrayId::Neighbors);
    const Region& wei = kr.image.region(ArrayId::Weights);
    const Region& prop = kr.image.region(ArrayId::Prop);

    Emitter em(kr);
    std::vector<double> old_cost;
    // Bellman-Ford pull rounds until fixpoint; every vertex relaxes over its
    // in-edges each round; the final no-change round is emitted.
    for (std::uint64_t round = 0;; ++round) {
        em.begin_segment();
        old_cost = cost;
        bool changed = false;
        for (std::uint32_t gpe = 0; gpe < num_gpes; ++gpe) {
            for (std::uint64_t v = kr.partition.begin(gpe); v < kr.partition.end(gpe); ++v) {
                em.load(gpe, off.elem_addr(v));
                em.load(gpe, off.elem_addr(v + 1));
                double best = old_cost[v];
                for (EdgeOffset j = g.col_ptr[v]; j < g.col_ptr[v + 1]; ++j) {
                    Vertex u = g.row_idx[j];
                    em.load(gpe, nei.elem_addr(j));
                    em.load(gpe, prop.elem_addr(u));
                    em.load(gpe, wei.elem_addr(j));
                    if (old_cost[u] != kInf) {
                        double cand = old_cost[u] + static_cast<double>(g.edge_weight[j]);
                        if (cand < best) best = cand;
                    }
                }
                if (best < old_cost[v]) {
                    cost[v] = best;
                    em.store(gpe, prop.elem_addr(v));
                    changed = true;
                }
            }
        }
        if (!changed || round > n) break;
    }
    kr.result_cost = std::move(cost);
    return kr;
}

KernelRun run_kernel(KernelKind kind, const Graph& g, std::uint32_t num_gpes,
                     const KernelParams& params) {
    switch (kind) {
        case KernelKind::PageRank:
            return run_pagerank(g, num_gpes, params.damping, params.iters, params);
        case KernelKind::Bfs:
            return run_bfs(g, num_gpes, params.source, params);
        case KernelKind::Sssp:
            return run_sssp(g, num_gpes, params.source, params);
    }
    throw ValidationError("unknown kernel kind");
}

Dig build_dig(KernelKind kernel, const MemoryImage& image) {
    auto require = [&](ArrayId id) -> const Region& {
        const Region& r = image.region(id);
        if (r.elem_size == 0)
            throw ValidationError(std::string("build_dig: image missing array ") +
                                  array_name(id));
        return r;
    };

    auto node_from = [](std::uint32_t id, const Region& r, bool trigger) {
        DigNode n;
        n.node_id = id;
        n.array = r.id;
        n.base = r.base;
        n.length = r.length;
        n.elem_size = r.elem_size;
        n.is_trigger = trigger;
        return n;
    };

    Dig dig;
    const Region& off = require(ArrayId::Offsets);
    const Region& nei = require(ArrayId::Neighbors);
    const Region& prop = require(ArrayId::Prop);

    dig.nodes.push_back(node_from(0, off, true));
    dig.nodes.push_back(node_from(1, nei, false));
    if (kernel == KernelKind::Sssp) {
        const Region& wei = require(ArrayId::Weights);
        dig.nodes.push_back(node_from(2, wei, false));
        dig.nodes.push_back(node_from(3, prop, false));
        dig.edges.push_back({0, 1, DigEdgeKind::Ranged});
        dig.edges.push_back({1, 3, DigEdgeKind::SingleValued});
        dig.edges.push_back({1, 2, DigEdgeKind::SameIndex});
    } else {
        dig.nodes.push_back(node_from(2, prop, false));
        dig.edges.push_back({0, 1, DigEdgeKind::Ranged});
        dig.edges.push_back({1, 2, DigEdgeKind::SingleValued});
    }
    return dig;
}

void dump_trace(const KernelRun& kr, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write trace: " + path);
    const char magic[4] = {'M', 'T', 'R', 'C'};
    const std::uint32_t version = 1;
    const std::uint64_t count = kr.total_refs();
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (std::uint32_t gpe = 0; gpe < kr.num_gpes; ++gpe) {
        for (std::uint32_t seg = 0; seg < kr.streams[gpe].size(); ++seg) {
            for (const MemRef& r : kr.streams[gpe][seg]) {
                std::uint32_t g32 = r.gpe_id;
                std::uint32_t kind = static_cast<std::uint32_t>(r.kind);
                std::uint32_t gap = r.compute_gap;
                out.write(reinterpret_cast<const char*>(&r.address), 8);
                out.write(reinterpret_cast<const char*>(&g32), 4);
                out.write(reinterpret_cast<const char*>(&kind), 4);
                out.write(reinterpret_cast<const char*>(&gap), 4);
                out.write(reinterpret_cast<const char*>(&seg), 4);
            }
        }
    }
    if (!out) throw ValidationError("short trace write: " + path);
}

} // namespace tmsim
