#pragma once
// Independent reference implementations used as test oracles. These must stay
// structurally different from the kernel implementations they check: dense
// matrix power iteration, queue BFS, and heap Dijkstra over an out-adjacency
// built by inverting the CSC arrays.
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "tmsim/graph.hpp"

namespace oracle {

using tmsim::Graph;
using tmsim::Vertex;

inline std::vector<std::vector<std::pair<Vertex, float>>> out_adjacency(const Graph& g) {
    std::vector<std::vector<std::pair<Vertex, float>>> out(g.num_vertices);
    for (Vertex v = 0; v < g.num_vertices; ++v)
        for (auto j = g.col_ptr[v]; j < g.col_ptr[v + 1]; ++j)
            out[g.row_idx[j]].emplace_back(v, g.edge_weight[j]);
    return out;
}

inline std::vector<double> pagerank_dense(const Graph& g, double damping,
                                          std::uint32_t iters) {
    const std::size_t n = g.num_vertices;
    // M[v][u] accumulates 1/outdeg(u) per edge u->v (duplicates add up).
    std::vector<double> outdeg(n, 0.0);
    for (Vertex u : g.row_idx) outdeg[u] += 1.0;
    std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
    for (Vertex v = 0; v < n; ++v)
        for (auto j = g.col_ptr[v]; j < g.col_ptr[v + 1]; ++j) {
            Vertex u = g.row_idx[j];
            M[v][u] += 1.0 / outdeg[u];
        }
    std::vector<double> rank(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    std::vector<double> next(n, 0.0);
    for (std::uint32_t it = 0; it < iters; ++it) {
        for (std::size_t v = 0; v < n; ++v) {
            double acc = 0.0;
            for (std::size_t u = 0; u < n; ++u) acc += M[v][u] * rank[u];
            next[v] = (1.0 - damping) / static_cast<double>(n) + damping * acc;
        }
        rank.swap(next);
    }
    return rank;
}

inline std::vector<std::uint32_t> bfs_queue(const Graph& g, Vertex source) {
    auto out = out_adjacency(g);
    std::vector<std::uint32_t> dist(g.num_vertices,
                                    std::numeric_limits<std::uint32_t>::max());
    std::queue<Vertex> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        Vertex u = q.front();
        q.pop();
        for (auto [v, w] : out[u]) {
            (void)w;
            if (dist[v] == std::numeric_limits<std::uint32_t>::max()) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

inline std::vector<double> dijkstra(const Graph& g, Vertex source) {
    auto out = out_adjacency(g);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.num_vertices, kInf);
    using Item = std::pair<double, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto [v, w] : out[u]) {
            const double cand = d + static_cast<double>(w);
            if (cand < dist[v]) {
                dist[v] = cand;
                pq.emplace(cand, v);
            }
        }
    }
    return dist;
}

} // namespace oracle
