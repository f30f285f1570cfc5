#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mrfuq/ising/coarse.hpp"

using namespace mrfuq;
using namespace mrfuq::ising;

TEST(Coarse, DeltaBoundsOnExhaustiveScan) {
    for (double gamma : {0.25, 1.0 / 16}) {
        long l = std::lround(1 / std::sqrt(gamma));
        CoarseReport r = coarse_grain_check(gamma, bump_profile(), 16 * l * 4, 0, 1);
        EXPECT_EQ(r.block, l);
        EXPECT_GT(r.pairs_checked, 0u);
        EXPECT_TRUE(r.delta1_holds()) << r.max_offblock_dev << " " << r.delta1;
        EXPECT_TRUE(r.delta2_holds()) << r.max_inblock_dev << " " << r.delta2;
        EXPECT_NEAR(r.delta1, std::pow(gamma, 1.5) * 5 / (2 * std::sqrt(3.0)), 1e-15);
        EXPECT_NEAR(r.delta2, gamma * 15.0 / 16, 1e-15);
    }
}

TEST(Coarse, HamiltonianErrorRatioBounded) {
    std::vector<double> max_ratio;
    for (double gamma : {0.25, 1.0 / 16, 1.0 / 64}) {
        long l = std::lround(1 / std::sqrt(gamma));
        CoarseReport r = coarse_grain_check(gamma, bump_profile(), 64 * l, 20, 7);
        ASSERT_EQ(r.ratios.size(), 20u);
        EXPECT_LE(r.max_ratio, r.ratio_bound);
        max_ratio.push_back(r.max_ratio);
    }
    // no growth as γ decreases beyond a modest factor
    EXPECT_LE(max_ratio[2], 4 * max_ratio[0] + 1e-12);
}

TEST(Coarse, CoarseHamiltonianDifference) {
    double gamma = 1.0 / 16;
    Profile p = bump_profile();
    std::mt19937_64 rng(2);
    std::vector<int> s(128);
    for (int t = 0; t < 5; ++t) {
        for (auto& v : s) v = rng() & 1 ? 1 : -1;
        double H = 0;
        for (long x = 0; x < 128; ++x)
            for (long y = x + 1; y < 128; ++y) H -= gamma * p.value(gamma * (y - x)) * s[x] * s[y];
        double Hbar = coarse_hamiltonian(gamma, p, s);
        double bound = ((2 + gamma / 2) * p.lipschitz + 0.5 * p.sup_norm) * 128 * std::sqrt(gamma);
        EXPECT_LE(std::abs(H - Hbar), bound);
    }
    std::vector<int> plus(128, 1);
    double H = 0;
    for (long x = 0; x < 128; ++x)
        for (long y = x + 1; y < 128; ++y) H -= gamma * p.value(gamma * (y - x));
    // uniform configuration: block averaging is exact
    EXPECT_NEAR(H, coarse_hamiltonian(gamma, p, plus), 1e-10);
}

TEST(Coarse, RejectsNonMeasurableBox) {
    EXPECT_THROW(coarse_grain_check(1.0 / 16, bump_profile(), 30, 1, 1), InputError);
    EXPECT_THROW(coarse_grain_check(0.2, bump_profile(), 30, 1, 1), InputError);
    EXPECT_THROW(coarse_grain_check(0.25, pwc_profile(), 32, 1, 1), InputError);
}
