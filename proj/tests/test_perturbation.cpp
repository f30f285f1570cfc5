#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mrfuq/diagnostics.hpp"
#include "mrfuq/perturbation.hpp"
#include "oracles.hpp"

using namespace mrfuq;

namespace {

UndirectedGraph ten_node_graph() {
    UndirectedGraph g(10);
    int e[][2] = {{1, 2}, {2, 3}, {3, 4}, {3, 7}, {3, 6}, {4, 6}, {4, 5},
                  {5, 6}, {6, 7}, {5, 8}, {8, 9}, {8, 10}, {9, 10}};
    for (auto& p : e) g.add_edge(p[0] - 1, p[1] - 1);
    return g;
}

LogLinearModel with_edge(const LogLinearModel& m, NodeId a, NodeId b) {
    auto g = m.graph();
    g.add_edge(a, b);
    return LogLinearModel::uniform(g, m.cardinalities());
}

double sum_log_potentials_alt_minus_base(const LogLinearModel& base, const LogLinearModel& alt,
                                         const Configuration& x) {
    return alt.log_potential(x) - base.log_potential(x);
}

} // namespace

TEST(Perturbation, MedicalTypeI) {
    DiagnosticsScenario s;
    s.a = -0.2;
    auto r = realize(s);
    auto rep = classify(r.base, r.alt_type1);
    EXPECT_EQ(rep.ptype, PerturbationType::TypeI);
    EXPECT_EQ(rep.changed, (CliqueSet{{0, 1}}));
    auto ef = excess_factor(r.base, r.alt_type1, rep);
    ASSERT_EQ(ef.terms().size(), 1u);
    auto sp = r.base.state_space();
    for (std::size_t i = 0; i < sp.size(); ++i) {
        auto x = sp.decode(i);
        EXPECT_NEAR(ef.evaluate(x), s.a * s.w_c * (x[1] == 0 ? 1.0 : 0.0), 1e-15);
    }
    EXPECT_NEAR(partition_ratio(r.base, ef), type1_partition(s), 1e-13);
    for (std::size_t i = 0; i < sp.size(); ++i) {
        auto x = sp.decode(i);
        double want = std::exp(s.a * s.w_c * (x[1] == 0 ? 1.0 : 0.0)) / type1_partition(s);
        EXPECT_NEAR(likelihood_ratio(r.base, ef, x), want, 1e-13);
    }
}

TEST(Perturbation, MedicalTypeII) {
    DiagnosticsScenario s;
    s.p_II = 0.3;
    s.a = 0.4;
    auto r = realize(s);
    auto rep = classify(r.base, r.alt_type2);
    EXPECT_EQ(rep.ptype, PerturbationType::TypeII);
    ASSERT_EQ(rep.supersets.size(), 1u);
    EXPECT_EQ(rep.supersets[0].clique, (NodeSet{0, 1, 3}));
    EXPECT_EQ(rep.supersets[0].absorbed, (CliqueSet{{0, 1}}));
    EXPECT_TRUE(rep.unions.empty());
    EXPECT_TRUE(rep.fresh.empty());
    auto ef = excess_factor(r.base, r.alt_type2, rep);
    ASSERT_EQ(ef.terms().size(), 1u);
    EXPECT_EQ(ef.terms()[0].clique, (NodeSet{0, 1, 3}));
    auto sp = r.base.state_space();
    for (std::size_t i = 0; i < sp.size(); ++i) {
        auto x = sp.decode(i);
        double want = (1 + s.a) * s.w_c * r.b_tilde[i] - s.w_c * r.b_c[i];
        EXPECT_NEAR(ef.evaluate(x), want, 1e-14);
    }
    EXPECT_NEAR(partition_ratio(r.base, ef), type2_partition_disjoint(s), 1e-13);
}

TEST(Perturbation, TenNodeDecompositions) {
    auto base = LogLinearModel::uniform(ten_node_graph(), std::vector<std::size_t>(10, 2));
    auto u = classify(base, with_edge(base, 3, 6));  // 4-7
    EXPECT_EQ(u.ptype, PerturbationType::TypeII);
    ASSERT_EQ(u.unions.size(), 1u);
    EXPECT_EQ(u.unions[0].clique, (NodeSet{2, 3, 5, 6}));
    EXPECT_EQ(u.unions[0].absorbed, (CliqueSet{{2, 3, 5}, {2, 5, 6}}));
    auto n = classify(base, with_edge(base, 5, 9));  // 6-10
    EXPECT_EQ(n.fresh, (CliqueSet{{5, 9}}));
    EXPECT_TRUE(n.unions.empty() && n.supersets.empty());
    auto sup = classify(base, with_edge(base, 4, 9));  // 5-10
    ASSERT_EQ(sup.supersets.size(), 1u);
    EXPECT_EQ(sup.supersets[0].clique, (NodeSet{4, 7, 9}));
    EXPECT_EQ(sup.supersets[0].absorbed, (CliqueSet{{4, 7}}));
}

TEST(Perturbation, IdentityAndTypeIII) {
    std::mt19937_64 rng(2);
    auto g = oracle::random_graph(5, 0.5, rng);
    auto m = oracle::random_model(g, std::vector<std::size_t>(5, 2), rng);
    auto rep = classify(m, m);
    EXPECT_EQ(rep.ptype, PerturbationType::TypeI);
    auto ef = excess_factor(m, m, rep);
    EXPECT_TRUE(ef.empty());
    EXPECT_DOUBLE_EQ(partition_ratio(m, ef), 1.0);
    EXPECT_DOUBLE_EQ(likelihood_ratio(m, ef, {0, 1, 0, 1, 1}), 1.0);

    auto other = oracle::random_model(oracle::random_graph(4, 0.5, rng), {2, 2, 2, 2}, rng);
    EXPECT_EQ(classify(m, other).ptype, PerturbationType::TypeIII);
    EXPECT_THROW(excess_factor(m, other), UnsupportedPerturbation);
    // edge removal
    UndirectedGraph full(3), path(3);
    full.add_edge(0, 1);
    full.add_edge(1, 2);
    full.add_edge(0, 2);
    path.add_edge(0, 1);
    path.add_edge(1, 2);
    auto a = LogLinearModel::uniform(full, {2, 2, 2});
    auto b = LogLinearModel::uniform(path, {2, 2, 2});
    EXPECT_EQ(classify(a, b).ptype, PerturbationType::TypeIII);
    EXPECT_EQ(classify(b, a).ptype, PerturbationType::TypeII);
}

TEST(Perturbation, DecompositionPartitionsNewCliques) {
    for (std::size_t n = 2; n <= 6; ++n) {
        std::uint64_t pairs = n * (n - 1) / 2;
        for (std::uint64_t mask = 0; mask < (1ull << pairs); ++mask) {
            auto g = oracle::graph_from_mask(n, mask);
            auto base = LogLinearModel::uniform(g, std::vector<std::size_t>(n, 2));
            auto cb = maximal_cliques(g);
            for (std::size_t k = 0; k < pairs; ++k) {
                if (mask >> k & 1) continue;
                auto g2 = oracle::graph_from_mask(n, mask | (1ull << k));
                auto alt = LogLinearModel::uniform(g2, std::vector<std::size_t>(n, 2));
                auto rep = classify(base, alt);
                ASSERT_EQ(rep.ptype, PerturbationType::TypeII);
                CliqueSet got;
                for (auto& a : rep.unions) got.push_back(a.clique);
                for (auto& a : rep.supersets) got.push_back(a.clique);
                for (auto& c : rep.fresh) got.push_back(c);
                std::size_t total = got.size();
                std::sort(got.begin(), got.end());
                ASSERT_EQ(std::unique(got.begin(), got.end()), got.end());
                CliqueSet want;
                for (auto& c : maximal_cliques(g2))
                    if (!std::binary_search(cb.begin(), cb.end(), c)) want.push_back(c);
                ASSERT_EQ(got, want);
                ASSERT_EQ(total, want.size());
            }
        }
    }
}

TEST(Perturbation, ExcessIdentityRandom) {
    std::mt19937_64 rng(17);
    int type2 = 0;
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 3 + rep % 4;
        auto g = oracle::random_graph(n, 0.45, rng);
        auto base = oracle::random_model(g, std::vector<std::size_t>(n, 2), rng, 1.5);
        LogLinearModel alt;
        if (rep % 2 == 0 || !oracle::type2_variant(base, rng, alt))
            alt = oracle::type1_variant(base, rng);
        auto report = classify(base, alt);
        type2 += report.ptype == PerturbationType::TypeII;
        auto ef = excess_factor(base, alt, report);
        auto sp = base.state_space();
        auto pb = oracle::brute_probs(base);
        auto pa = oracle::brute_probs(alt);
        for (std::size_t i = 0; i < sp.size(); ++i) {
            auto x = sp.decode(i);
            ASSERT_NEAR(ef.evaluate(x), sum_log_potentials_alt_minus_base(base, alt, x), 1e-12);
            ASSERT_NEAR(likelihood_ratio(base, ef, x), pa[i] / pb[i], 1e-10 * pa[i] / pb[i]);
        }
        double zr = partition_ratio(base, ef);
        double want = std::exp(log_partition(alt) - log_partition(base));
        ASSERT_NEAR(zr / want, 1.0, 1e-10);
    }
    EXPECT_GT(type2, 50);
}

TEST(Perturbation, ChangedCommonCliqueUnderTypeII) {
    UndirectedGraph g(4);
    g.add_edge(0, 1);
    g.add_edge(2, 3);
    std::mt19937_64 rng(4);
    auto base = oracle::random_model(g, {2, 2, 2, 2}, rng);
    auto g2 = g;
    g2.add_edge(1, 2);
    auto fs = base.factors();
    fs.push_back({{1, 2}, 0.7, {0, 1, 1, 0}});
    fs[1].weight += 0.3;  // {2,3} kept but changed
    LogLinearModel alt(g2, {2, 2, 2, 2}, fs);
    auto rep = classify(base, alt);
    EXPECT_EQ(rep.changed_common, (CliqueSet{{2, 3}}));
    EXPECT_EQ(rep.fresh, (CliqueSet{{1, 2}}));
    auto ef = excess_factor(base, alt, rep);
    auto sp = base.state_space();
    for (std::size_t i = 0; i < sp.size(); ++i) {
        auto x = sp.decode(i);
        EXPECT_NEAR(ef.evaluate(x), alt.log_potential(x) - base.log_potential(x), 1e-14);
    }
}

TEST(Perturbation, ReducedContextSubstitution) {
    std::mt19937_64 rng(9);
    auto g = oracle::random_graph(5, 0.6, rng);
    auto base = oracle::random_model(g, std::vector<std::size_t>(5, 2), rng);
    LogLinearModel alt;
    ASSERT_TRUE(oracle::type2_variant(base, rng, alt));
    auto ef = excess_factor(base, alt);
    auto rb = reduce(base, {2}, {1});
    auto ra = reduce(alt, {2}, {1});
    auto sp = rb.state_space();
    for (std::size_t i = 0; i < sp.size(); ++i) {
        auto z = sp.decode(i);
        EXPECT_NEAR(likelihood_ratio(rb, ef, z), probability(ra, z) / probability(rb, z), 1e-12);
    }
    EXPECT_NEAR(partition_ratio(rb, ef), std::exp(log_partition(ra) - log_partition(rb)), 1e-12);
}
