#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace tmsim {

using Vertex = std::uint32_t;
using EdgeOffset = std::uint64_t;

// Directed graph in compressed-sparse-column form: column v lists the
// in-neighbors of v. This is the only representation the kernels use;
// out-edges are never materialized.
struct Graph {
    Vertex num_vertices = 0;
    std::uint64_t num_edges = 0;
    std::vector<EdgeOffset> col_ptr;  // length num_vertices + 1, nondecreasing
    std::vector<Vertex> row_idx;      // length num_edges, values < num_vertices
    std::vector<float> edge_weight;   // length num_edges, all-ones when unweighted

    bool operator==(const Graph&) const = default;
};

struct GraphSpec {
    enum class Kind { EdgeListFile, UniformRandom, Kronecker };
    Kind kind = Kind::UniformRandom;
    std::string path;          // edge-list-file
    bool weighted = false;     // edge-list-file
    std::uint64_t n = 1;       // uniform-random
    double avg_degree = 0.0;   // uniform-random
    std::uint32_t scale = 0;   // kronecker
    std::uint32_t edge_factor = 1;
    std::uint64_t seed = 0;
};

// Throws ValidationError when an invariant fails.
void validate_graph(const Graph& g);

// Edge-list text format: optional header line "n=<int> m=<int>", '#' comments,
// whitespace-separated "src dst [weight]" with 0-based ids. Edge src->dst is
// stored under column dst. Duplicate edges are kept.
Graph load_edge_list(const std::string& path, bool weighted);

// Binary CSC cache file: magic "CSCG", version u32, n u64, m u64, then
// col_ptr / row_idx / weights as little-endian arrays.
void save_csc(const Graph& g, const std::string& path);
Graph load_csc(const std::string& path);

// G(n, m) with m = round(n * avg_degree) distinct directed edges drawn
// uniformly without self-loops; deterministic in seed.
Graph gen_uniform_random(std::uint64_t n, double avg_degree, std::uint64_t seed);

// R-MAT recursive descent, n = 2^scale vertices, m = edge_factor * n edges,
// initiator (0.57, 0.19, 0.19, 0.05). Self-loops and duplicates are kept.
Graph gen_kronecker(std::uint32_t scale, std::uint32_t edge_factor, std::uint64_t seed);

// Builds the graph named by a GraphSpec (dispatch over the three kinds).
Graph build_graph(const GraphSpec& spec);

struct DegreeStats {
    std::uint64_t min_in_degree = 0;
    std::uint64_t max_in_degree = 0;
    double mean_in_degree = 0.0;
};

DegreeStats degree_stats(const Graph& g);

} // namespace tmsim
