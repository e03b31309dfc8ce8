#include "tmsim/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tmsim/errors.hpp"
#include "tmsim/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary graph files are written in host order and assume little-endian");

namespace tmsim {

namespace {

// Assembles CSC from an edge list given in (src, dst[, weight]) order.
// Stable counting sort by dst: row order within a column follows input order.
Graph build_csc(std::uint64_t n, const std::vector<Vertex>& src,
                const std::vector<Vertex>& dst, const std::vector<float>* weights) {
    Graph g;
    g.num_vertices = static_cast<Vertex>(n);
    g.num_edges = src.size();
    g.col_ptr.assign(n + 1, 0);
    for (Vertex d : dst) g.col_ptr[d + 1]++;
    for (std::uint64_t v = 0; v < n; ++v) g.col_ptr[v + 1] += g.col_ptr[v];

    g.row_idx.resize(g.num_edges);
    g.edge_weight.assign(g.num_edges, 1.0f);
    std::vector<EdgeOffset> cursor(g.col_ptr.begin(), g.col_ptr.end() - 1);
    for (std::size_t e = 0; e < src.size(); ++e) {
        EdgeOffset slot = cursor[dst[e]]++;
        g.row_idx[slot] = src[e];
        if (weights) g.edge_weight[slot] = (*weights)[e];
    }
    return g;
}

bool parse_u64(const std::string& tok, std::uint64_t& out) {
    if (tok.empty()) return false;
    std::uint64_t v = 0;
    for (char c : tok) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    out = v;
    return true;
}

} // namespace

void validate_graph(const Graph& g) {
    if (g.col_ptr.size() != static_cast<std::size_t>(g.num_vertices) + 1)
        throw ValidationError("graph: col_ptr length != num_vertices + 1");
    if (g.col_ptr.front() != 0 || g.col_ptr.back() != g.num_edges)
        throw ValidationError("graph: col_ptr endpoints wrong");
    for (std::size_t v = 0; v + 1 < g.col_ptr.size(); ++v)
        if (g.col_ptr[v] > g.col_ptr[v + 1])
            throw ValidationError("graph: col_ptr not nondecreasing");
    if (g.row_idx.size() != g.num_edges || g.edge_weight.size() != g.num_edges)
        throw ValidationError("graph: edge array lengths inconsistent");
    for (Vertex r : g.row_idx)
        if (r >= g.num_vertices) throw ValidationError("graph: row_idx out of range");
    for (float w : g.edge_weight)
        if (!(w >= 0.0f)) throw ValidationError("graph: negative edge weight");
}

Graph load_edge_list(const std::string& path, bool weighted) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open edge list: " + path);

    std::vector<Vertex> src, dst;
    std::vector<float> wts;
    bool have_header = false;
    std::uint64_t header_n = 0, header_m = 0;
    bool saw_data = false;
    std::uint64_t max_id = 0;
    bool any_edge = false;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        std::istringstream ls(line);
        std::string a, b;
        ls >> a;
        // Optional header before any edge: "n=<int> m=<int>".
        if (!saw_data && a.rfind("n=", 0) == 0) {
            std::string mstr;
            ls >> mstr;
            if (mstr.rfind("m=", 0) != 0 || !parse_u64(a.substr(2), header_n) ||
                !parse_u64(mstr.substr(2), header_m))
                throw ParseError("bad header at line " + std::to_string(lineno));
            have_header = true;
            saw_data = true;
            continue;
        }
        saw_data = true;
        if (!(ls >> b))
            throw ParseError("missing dst field at line " + std::to_string(lineno));
        if (!a.empty() && a[0] == '-')
            throw ValidationError("negative vertex id at line " + std::to_string(lineno));
        if (!b.empty() && b[0] == '-')
            throw ValidationError("negative vertex id at line " + std::to_string(lineno));
        std::uint64_t s, d;
        if (!parse_u64(a, s) || !parse_u64(b, d))
            throw ParseError("malformed edge at line " + std::to_string(lineno));
        float w = 1.0f;
        if (weighted) {
            std::string wstr;
            if (!(ls >> wstr))
                throw ParseError("missing weight at line " + std::to_string(lineno));
            try {
                w = std::stof(wstr);
            } catch (...) {
                throw ParseError("malformed weight at line " + std::to_string(lineno));
            }
            if (w < 0.0f)
                throw ValidationError("negative weight at line " + std::to_string(lineno));
        }
        if (s >= UINT32_MAX || d >= UINT32_MAX)
            throw ValidationError("vertex id too large at line " + std::to_string(lineno));
        src.push_back(static_cast<Vertex>(s));
        dst.push_back(static_cast<Vertex>(d));
        wts.push_back(w);
        max_id = std::max({max_id, s, d});
        any_edge = true;
    }

    std::uint64_t n = any_edge ? max_id + 1 : 0;
    if (have_header) {
        if (any_edge && max_id >= header_n)
            throw ValidationError("vertex id exceeds header n");
        if (src.size() != header_m)
            throw ValidationError("edge count disagrees with header m");
        n = header_n;
    }
    return build_csc(n, src, dst, weighted ? &wts : nullptr);
}

void save_csc(const Graph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write: " + path);
    const char magic[4] = {'C', 'S', 'C', 'G'};
    const std::uint32_t version = 1;
    const std::uint64_t n = g.num_vertices, m = g.num_edges;
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&m), sizeof m);
    out.write(reinterpret_cast<const char*>(g.col_ptr.data()),
              static_cast<std::streamsize>(g.col_ptr.size() * sizeof(EdgeOffset)));
    out.write(reinterpret_cast<const char*>(g.row_idx.data()),
              static_cast<std::streamsize>(g.row_idx.size() * sizeof(Vertex)));
    out.write(reinterpret_cast<const char*>(g.edge_weight.data()),
              static_cast<std::streamsize>(g.edge_weight.size() * sizeof(float)));
    if (!out) throw ValidationError("short write: " + path);
}

Graph load_csc(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + path);
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t n = 0, m = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (!in || std::memcmp(magic, "CSCG", 4) != 0)
        throw ParseError("not a CSCG file: " + path);
    if (version != 1) throw ParseError("unsupported CSCG version");
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&m), sizeof m);
    Graph g;
    g.num_vertices = static_cast<Vertex>(n);
    g.num_edges = m;
    g.col_ptr.resize(n + 1);
    g.row_idx.resize(m);
    g.edge_weight.resize(m);
    in.read(reinterpret_cast<char*>(g.col_ptr.data()),
            static_cast<std::streamsize>(g.col_ptr.size() * sizeof(EdgeOffset)));
    in.read(reinterpret_cast<char*>(g.row_idx.data()),
            static_cast<std::streamsize>(g.row_idx.size() * sizeof(Vertex)));
    in.read(reinterpret_cast<char*>(g.edge_weight.data()),
            static_cast<std::streamsize>(g.edge_weight.size() * sizeof(float)));
    if (!in) throw ParseError("truncated CSCG file: " + path);
    validate_graph(g);
    return g;
}

Graph gen_uniform_random(std::uint64_t n, double avg_degree, std::uint64_t seed) {
    if (n < 1) throw ValidationError("uniform-random: n must be >= 1");
    if (n >= UINT32_MAX) throw ValidationError("uniform-random: n exceeds 32-bit ids");
    if (avg_degree < 0.0) throw ValidationError("uniform-random: avg_degree must be >= 0");
    const std::uint64_t m = static_cast<std::uint64_t>(std::llround(
        static_cast<double>(n) * avg_degree));
    const std::uint64_t slots = n * (n - 1);
    if (m > slots)
        throw ValidationError("uniform-random: m exceeds n*(n-1), infeasible");

    // Floyd's sampling of m distinct values from [0, slots); each value k
    // encodes a non-self-loop pair (src, dst).
    Rng rng(seed);
    std::unordered_set<std::uint64_t> picked;
    picked.reserve(m * 2);
    for (std::uint64_t j = slots - m; j < slots; ++j) {
        std::uint64_t t = rng.next_below(j + 1);
        picked.insert(picked.count(t) ? j : t);
    }
    std::vector<std::uint64_t> keys(picked.begin(), picked.end());
    std::sort(keys.begin(), keys.end());

    std::vector<Vertex> src(m), dst(m);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        std::uint64_t k = keys[i];
        std::uint64_t s = k / (n - 1);
        std::uint64_t r = k % (n - 1);
        std::uint64_t d = r + (r >= s ? 1 : 0);
        src[i] = static_cast<Vertex>(s);
        dst[i] = static_cast<Vertex>(d);
    }
    return build_csc(n, src, dst, nullptr);
}

Graph gen_kronecker(std::uint32_t scale, std::uint32_t edge_factor, std::uint64_t seed) {
    if (scale > 24) throw ValidationError("kronecker: scale out of bounds [0, 24]");
    if (edge_factor < 1) throw ValidationError("kronecker: edge_factor must be >= 1");
    const std::uint64_t n = 1ULL << scale;
    const std::uint64_t m = static_cast<std::uint64_t>(edge_factor) * n;

    // Graph500 initiator probabilities, cumulative over quadrants
    // (0,0) (0,1) (1,0) (1,1).
    constexpr double kCumA = 0.57, kCumB = 0.76, kCumC = 0.95;

    Rng rng(seed);
    std::vector<Vertex> src(m), dst(m);
    for (std::uint64_t e = 0; e < m; ++e) {
        std::uint64_t s = 0, d = 0;
        for (std::uint32_t level = 0; level < scale; ++level) {
            double u = rng.next_double();
            std::uint64_t sbit = (u >= kCumB) ? 1 : 0;
            std::uint64_t dbit = (u >= kCumA && u < kCumB) || (u >= kCumC) ? 1 : 0;
            s = (s << 1) | sbit;
            d = (d << 1) | dbit;
        }
        src[e] = static_cast<Vertex>(s);
        dst[e] = static_cast<Vertex>(d);
    }
    return build_csc(n, src, dst, nullptr);
}

Graph build_graph(const GraphSpec& spec) {
    switch (spec.kind) {
        case GraphSpec::Kind::EdgeListFile:
            return load_edge_list(spec.path, spec.weighted);
        case GraphSpec::Kind::UniformRandom:
            return gen_uniform_random(spec.n, spec.avg_degree, spec.seed);
        case GraphSpec::Kind::Kronecker:
            return gen_kronecker(spec.scale, spec.edge_factor, spec.seed);
    }
    throw ValidationError("unknown graph kind");
}

DegreeStats degree_stats(const Graph& g) {
    validate_graph(g);
    DegreeStats st;
    if (g.num_vertices == 0) return st;
    st.min_in_degree = UINT64_MAX;
    for (Vertex v = 0; v < g.num_vertices; ++v) {
        std::uint64_t deg = g.col_ptr[v + 1] - g.col_ptr[v];
        st.min_in_degree = std::min(st.min_in_degree, deg);
        st.max_in_degree = std::max(st.max_in_degree, deg);
    }
    st.mean_in_degree = static_cast<double>(g.num_edges) / static_cast<double>(g.num_vertices);
    return st;
}

} // namespace tmsim
