#include <gtest/gtest.h>

#include <random>

#include "mrfuq/model_io.hpp"
#include "oracles.hpp"

using namespace mrfuq;

namespace {

const char* kMedical =
    "mrf 1\n"
    "nodes 4\n"
    "cardinalities 2 2 2 2\n"
    "edges 4\n"
    "0 1\n"
    "1 2\n"
    "1 3\n"
    "2 3\n"
    "factors 2\n"
    "clique 0 1\n"
    "weight 1.5\n"
    "table 1 0 1 1\n"
    "clique 1 2 3\n"
    "weight 0\n"
    "table 0 0 0 0 0 0 0 0\n";

void expect_parse_error(const std::string& text, std::size_t line, std::size_t col) {
    try {
        parse_model(text);
        FAIL() << "no error for:\n" << text;
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, line) << e.what();
        EXPECT_EQ(e.col, col) << e.what();
    }
}

} // namespace

TEST(ModelIo, CanonicalRoundTrip) {
    auto m = parse_model(kMedical);
    EXPECT_EQ(serialize_model(m), kMedical);
    EXPECT_NEAR(log_partition(m), std::log(12 * std::exp(1.5) + 4), 1e-13);
}

TEST(ModelIo, RandomRoundTrip) {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 50; ++rep) {
        auto g = oracle::random_graph(2 + rep % 6, 0.5, rng);
        std::vector<std::size_t> card(g.node_count(), 2);
        card[0] = 3;
        auto m = oracle::random_model(g, card, rng, 3.0);
        auto s = serialize_model(m);
        auto m2 = parse_model(s);
        EXPECT_TRUE(m == m2);
        EXPECT_EQ(serialize_model(m2), s);
    }
}

TEST(ModelIo, CommentsAndOrder) {
    std::string t =
        "# header\nmrf 1\nnodes 2  # two\ncardinalities 2 2\nedges 1\n1 0\nfactors 1\n"
        "clique 0 1\nweight 0.5\ntable 0 1 1 0\n";
    auto m = parse_model(t);
    EXPECT_EQ(m.graph().edge_count(), 1u);
}

TEST(ModelIo, ErrorsCarryPosition) {
    expect_parse_error("mrf 2\n", 1, 5);
    expect_parse_error("mrf 1\nnodes x\n", 2, 7);
    expect_parse_error("mrf 1\nnodes 2\ncardinalities 2 1\n", 3, 17);
    expect_parse_error("mrf 1\nnodes 2\ncardinalities 2 2\nedges 1\n0 5\n", 5, 1);
    expect_parse_error(
        "mrf 1\nnodes 2\ncardinalities 2 2\nedges 1\n0 1\nfactors 1\nclique 0 1\nweight 1\n"
        "table 0 0 0\n",
        9, 1);
    expect_parse_error(
        "mrf 1\nnodes 2\ncardinalities 2 2\nedges 1\n0 1\nfactors 1\nclique 0 1\nweight nan\n",
        8, 8);
    expect_parse_error(
        "mrf 1\nnodes 3\ncardinalities 2 2 2\nedges 1\n0 1\nfactors 1\nclique 0 2\n", 7, 1);
}
