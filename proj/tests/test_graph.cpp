#include <gtest/gtest.h>

#include "mrfuq/graph.hpp"
#include "oracles.hpp"

using namespace mrfuq;

namespace {

UndirectedGraph medical_graph() {
    UndirectedGraph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(1, 3);
    g.add_edge(2, 3);
    return g;
}

// 10-node example graph, 0-based.
UndirectedGraph ten_node_graph() {
    UndirectedGraph g(10);
    int e[][2] = {{1, 2}, {2, 3}, {3, 4}, {3, 7}, {3, 6}, {4, 6}, {4, 5},
                  {5, 6}, {6, 7}, {5, 8}, {8, 9}, {8, 10}, {9, 10}};
    for (auto& p : e) g.add_edge(p[0] - 1, p[1] - 1);
    return g;
}

} // namespace

TEST(Graph, MedicalCliques) {
    CliqueSet want{{0, 1}, {1, 2, 3}};
    EXPECT_EQ(maximal_cliques(medical_graph()), want);
}

TEST(Graph, Triangle) {
    UndirectedGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    EXPECT_EQ(maximal_cliques(g), (CliqueSet{{0, 1, 2}}));
}

TEST(Graph, TenNodeCliques) {
    CliqueSet want{{0, 1}, {1, 2}, {2, 3, 5}, {2, 5, 6}, {3, 4, 5}, {4, 7}, {7, 8, 9}};
    EXPECT_EQ(maximal_cliques(ten_node_graph()), want);
}

TEST(Graph, EmptyAndIsolated) {
    EXPECT_TRUE(maximal_cliques(UndirectedGraph(0)).empty());
    UndirectedGraph g(3);
    g.add_edge(0, 1);
    EXPECT_EQ(maximal_cliques(g), (CliqueSet{{0, 1}, {2}}));
}

TEST(Graph, ExhaustiveUpToFiveNodes) {
    for (std::size_t n = 1; n <= 5; ++n) {
        std::uint64_t pairs = n * (n - 1) / 2;
        for (std::uint64_t mask = 0; mask < (1ull << pairs); ++mask) {
            auto g = oracle::graph_from_mask(n, mask);
            ASSERT_EQ(maximal_cliques(g), oracle::subset_lattice_cliques(g)) << n << " " << mask;
        }
    }
}

TEST(Graph, InducedSubgraph) {
    auto g = ten_node_graph();
    NodeSet all{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto same = induced_subgraph(g, all);
    EXPECT_EQ(same.graph, g);
    for (NodeId i = 0; i < 10; ++i) EXPECT_EQ(same.new_to_old[i], i);

    auto r = induced_subgraph(g, {0, 1, 2, 4, 5, 6, 7, 9});
    EXPECT_EQ(r.graph.node_count(), 8u);
    for (auto [a, b] : r.graph.edges()) {
        EXPECT_TRUE(g.adjacent(r.new_to_old[a], r.new_to_old[b]));
    }
    std::size_t kept = 0;
    for (auto [a, b] : g.edges())
        if (a != 3 && a != 8 && b != 3 && b != 8) ++kept;
    EXPECT_EQ(r.graph.edge_count(), kept);

    UndirectedGraph t(3);
    t.add_edge(0, 1);
    t.add_edge(1, 2);
    t.add_edge(0, 2);
    EXPECT_EQ(induced_subgraph(t, {0, 1}).graph.edge_count(), 1u);
    EXPECT_THROW(induced_subgraph(t, {0, 7}), InputError);
}

TEST(Graph, Separation) {
    UndirectedGraph p(3);
    p.add_edge(0, 1);
    p.add_edge(1, 2);
    EXPECT_TRUE(separates(p, {0}, {2}, {1}));
    EXPECT_FALSE(separates(p, {0}, {2}, {}));
    EXPECT_TRUE(separates(medical_graph(), {0}, {3}, {1, 2}));
    EXPECT_THROW(separates(p, {0}, {0}, {}), InputError);
}

TEST(Graph, RejectsBadEdges) {
    UndirectedGraph g(2);
    EXPECT_THROW(g.add_edge(0, 0), InputError);
    EXPECT_THROW(g.add_edge(0, 5), InputError);
}
