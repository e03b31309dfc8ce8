#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "tmsim/errors.hpp"
#include "tmsim/graph.hpp"

using namespace tmsim;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/tmsim_test_") + name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("edge list loads as CSC in-neighbor form") {
    auto path = write_temp("basic.el", "0 1\n0 2\n1 2\n");
    Graph g = load_edge_list(path, false);
    CHECK(g.num_vertices == 3);
    CHECK(g.num_edges == 3);
    CHECK(g.col_ptr == std::vector<EdgeOffset>{0, 0, 1, 3});
    CHECK(g.row_idx == std::vector<Vertex>{0, 0, 1});
    std::remove(path.c_str());
}

TEST_CASE("edge list header controls empty graphs") {
    auto path = write_temp("header.el", "# comment\nn=3 m=0\n");
    Graph g = load_edge_list(path, false);
    CHECK(g.num_vertices == 3);
    CHECK(g.num_edges == 0);
    CHECK(g.col_ptr == std::vector<EdgeOffset>{0, 0, 0, 0});
    CHECK(g.row_idx.empty());
    std::remove(path.c_str());
}

TEST_CASE("edge list errors carry line numbers") {
    auto bad = write_temp("bad.el", "0 x\n");
    CHECK_THROWS_WITH_AS(load_edge_list(bad, false),
                         doctest::Contains("line 1"), ParseError);
    std::remove(bad.c_str());

    auto neg = write_temp("neg.el", "0 1\n-1 2\n");
    CHECK_THROWS_AS(load_edge_list(neg, false), ValidationError);
    std::remove(neg.c_str());

    auto noweight = write_temp("now.el", "0 1\n");
    CHECK_THROWS_AS(load_edge_list(noweight, true), ParseError);
    std::remove(noweight.c_str());
}

TEST_CASE("weighted edge list keeps weights and duplicates") {
    auto path = write_temp("w.el", "0 1 2.5\n0 1 2.5\n2 1 0.5\n");
    Graph g = load_edge_list(path, true);
    CHECK(g.num_edges == 3);  // duplicates kept
    CHECK(g.col_ptr == std::vector<EdgeOffset>{0, 0, 3, 3});
    CHECK(g.edge_weight[0] == doctest::Approx(2.5));
    CHECK(g.edge_weight[2] == doctest::Approx(0.5));
    std::remove(path.c_str());
}

TEST_CASE("binary CSC round trip is identity") {
    Graph g = gen_uniform_random(200, 4.0, 17);
    const std::string path = "/tmp/tmsim_test_roundtrip.cscg";
    save_csc(g, path);
    Graph h = load_csc(path);
    CHECK(g == h);
    std::remove(path.c_str());
}

TEST_CASE("edge list -> serialize -> reload is identity") {
    auto path = write_temp("rt.el", "0 3\n1 3\n2 0\n3 1\n3 2\n");
    Graph g = load_edge_list(path, false);
    const std::string bin = "/tmp/tmsim_test_rt.cscg";
    save_csc(g, bin);
    Graph h = load_csc(bin);
    CHECK(g.col_ptr == h.col_ptr);
    CHECK(g.row_idx == h.row_idx);
    CHECK(g.edge_weight == h.edge_weight);
    std::remove(path.c_str());
    std::remove(bin.c_str());
}

TEST_CASE("uniform random generator") {
    SUBCASE("n=1 deg=0 has no edges") {
        Graph g = gen_uniform_random(1, 0.0, 7);
        CHECK(g.num_vertices == 1);
        CHECK(g.num_edges == 0);
    }
    SUBCASE("edge count and invariants hold") {
        Graph g = gen_uniform_random(100, 8.0, 1);
        CHECK(g.num_edges == 800);
        validate_graph(g);
        std::uint64_t sum = 0;
        for (Vertex v = 0; v < g.num_vertices; ++v)
            sum += g.col_ptr[v + 1] - g.col_ptr[v];
        CHECK(sum == g.num_edges);
        // no self-loops: row_idx[j] != column
        for (Vertex v = 0; v < g.num_vertices; ++v)
            for (EdgeOffset j = g.col_ptr[v]; j < g.col_ptr[v + 1]; ++j)
                CHECK(g.row_idx[j] != v);
    }
    SUBCASE("deterministic in the seed") {
        CHECK(gen_uniform_random(100, 8.0, 1) == gen_uniform_random(100, 8.0, 1));
        CHECK(gen_uniform_random(100, 8.0, 1) != gen_uniform_random(100, 8.0, 2));
    }
    SUBCASE("infeasible edge counts are rejected") {
        CHECK_THROWS_AS(gen_uniform_random(2, 3.0, 1), ValidationError);
    }
}

TEST_CASE("kronecker generator") {
    SUBCASE("scale 0 yields the single-cell self-loop") {
        Graph g = gen_kronecker(0, 1, 3);
        CHECK(g.num_vertices == 1);
        CHECK(g.num_edges == 1);
        CHECK(g.row_idx == std::vector<Vertex>{0});
    }
    SUBCASE("degree distribution is skewed") {
        Graph g = gen_kronecker(10, 8, 5);
        CHECK(g.num_vertices == 1024);
        CHECK(g.num_edges == 8192);
        DegreeStats st = degree_stats(g);
        CHECK(st.mean_in_degree == doctest::Approx(8.0));
        CHECK(st.max_in_degree >= 4 * 8);
    }
    SUBCASE("deterministic in the seed") {
        CHECK(gen_kronecker(6, 4, 9) == gen_kronecker(6, 4, 9));
    }
    SUBCASE("scale bound") {
        CHECK_THROWS_AS(gen_kronecker(25, 1, 1), ValidationError);
    }
}

TEST_CASE("degree stats") {
    SUBCASE("chain") {
        auto path = write_temp("chain.el", "0 1\n1 2\n");
        Graph g = load_edge_list(path, false);
        DegreeStats st = degree_stats(g);
        CHECK(st.min_in_degree == 0);
        CHECK(st.max_in_degree == 1);
        CHECK(st.mean_in_degree == doctest::Approx(2.0 / 3.0));
        std::remove(path.c_str());
    }
    SUBCASE("edgeless") {
        auto path = write_temp("edgeless.el", "n=4 m=0\n");
        DegreeStats st = degree_stats(load_edge_list(path, false));
        CHECK(st.min_in_degree == 0);
        CHECK(st.max_in_degree == 0);
        CHECK(st.mean_in_degree == 0.0);
        std::remove(path.c_str());
    }
    SUBCASE("complete K3") {
        auto path = write_temp("k3.el", "0 1\n0 2\n1 0\n1 2\n2 0\n2 1\n");
        DegreeStats st = degree_stats(load_edge_list(path, false));
        CHECK(st.min_in_degree == 2);
        CHECK(st.max_in_degree == 2);
        CHECK(st.mean_in_degree == doctest::Approx(2.0));
        std::remove(path.c_str());
    }
}
