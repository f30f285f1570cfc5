#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../errors.hpp"
#include "kernel.hpp"

namespace mrfuq::ising {

struct CoarseReport {
    double gamma = 0.0;
    long block = 0;  // l = γ^{-1/2}
    long L = 0;
    double delta1 = 0.0, delta2 = 0.0;
    double max_offblock_dev = 0.0;  // max |J_γ - J̄| over distinct blocks within 2/γ
    double max_inblock_dev = 0.0;   // max |J_γ - J̄(i,i)| within a block
    std::size_t pairs_checked = 0;
    std::vector<double> ratios;  // |H - H̄| / (|Δ| γ^{1/2}) per sample
    double max_ratio = 0.0;
    double ratio_bound = 0.0;  // (2 + γ/2)‖DJ‖∞ + ‖J‖∞/2

    bool delta1_holds() const { return max_offblock_dev <= delta1 * (1.0 + 1e-12); }
    bool delta2_holds() const { return max_inblock_dev <= delta2 * (1.0 + 1e-12); }
};

/// Block-average the 1-D Kac interaction on blocks of side γ^{-1/2} and
/// compare it with the site interaction; free boundary, h = 0.
inline CoarseReport coarse_grain_check(double gamma, const Profile& J, long L, std::size_t samples,
                                       std::uint64_t seed) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0,1)");
    double lf = 1.0 / std::sqrt(gamma);
    long l = std::lround(lf);
    if (std::abs(lf - static_cast<double>(l)) > 1e-9 || l < 1)
        throw InputError("gamma^{-1/2} must be an integer block side");
    if (L <= 0 || L % l != 0)
        throw InputError("box side " + std::to_string(L) + " is not a multiple of the block side " +
                         std::to_string(l));
    if (!std::isfinite(J.lipschitz)) throw InputError("profile needs a finite derivative bound");

    CoarseReport r;
    r.gamma = gamma;
    r.block = l;
    r.L = L;
    r.delta1 = std::pow(gamma, 1.5) * J.lipschitz;
    r.delta2 = gamma * J.sup_norm;
    r.ratio_bound = (2.0 + gamma / 2.0) * J.lipschitz + 0.5 * J.sup_norm;

    auto Jg = [&](long x, long y) { return x == y ? 0.0 : gamma * J.value(gamma * std::abs(x - y)); };
    long reach = static_cast<long>(std::ceil(2.0 / gamma)) + 2 * l;
    long nb = reach / l + 2;
    // J̄ depends only on the block offset k = j - i
    std::vector<double> Jbar(nb + 1, 0.0);
    for (long k = 0; k <= nb; ++k) {
        double s = 0.0;
        for (long x = 0; x < l; ++x)
            for (long y = k * l; y < (k + 1) * l; ++y) s += Jg(x, y);
        Jbar[k] = k == 0 ? (l > 1 ? s / static_cast<double>(l * (l - 1)) : 0.0)
                         : s / static_cast<double>(l * l);
    }
    auto Jb = [&](long x, long y) {
        long k = std::abs(x / l - y / l);
        return k <= nb ? Jbar[k] : 0.0;
    };

    for (long x = 0; x < L; ++x)
        for (long y = 0; y < L; ++y) {
            if (x == y) continue;
            double dev = std::abs(Jg(x, y) - Jb(x, y));
            if (x / l == y / l) {
                r.max_inblock_dev = std::max(r.max_inblock_dev, dev);
            } else if (std::abs(x - y) <= 2.0 / gamma) {
                r.max_offblock_dev = std::max(r.max_offblock_dev, dev);
            }
            ++r.pairs_checked;
        }

    // H - H̄ = -Σ_{x<y} (J_γ - J̄) σσ since J̄ is constant on block pairs
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<int> s(L);
    for (std::size_t k = 0; k < samples; ++k) {
        for (auto& v : s) v = coin(rng) ? 1 : -1;
        double diff = 0.0;
        for (long x = 0; x < L; ++x)
            for (long y = x + 1; y < L && y - x <= reach; ++y)
                diff -= (Jg(x, y) - Jb(x, y)) * s[x] * s[y];
        double ratio = std::abs(diff) / (static_cast<double>(L) * std::sqrt(gamma));
        r.ratios.push_back(ratio);
        r.max_ratio = std::max(r.max_ratio, ratio);
    }
    return r;
}

/// Coarse Hamiltonian from block magnetizations, for direct comparison.
inline double coarse_hamiltonian(double gamma, const Profile& J, const std::vector<int>& sigma) {
    long L = static_cast<long>(sigma.size());
    long l = std::lround(1.0 / std::sqrt(gamma));
    if (L % l != 0) throw InputError("box side is not a multiple of the block side");
    long B = L / l;
    std::vector<double> m(B, 0.0);
    for (long x = 0; x < L; ++x) m[x / l] += sigma[x] / static_cast<double>(l);
    auto Jg = [&](long x, long y) { return x == y ? 0.0 : gamma * J.value(gamma * std::abs(x - y)); };
    double H = 0.0;
    for (long i = 0; i < B; ++i)
        for (long j = i; j < B; ++j) {
            double s = 0.0;
            for (long x = i * l; x < (i + 1) * l; ++x)
                for (long y = j * l; y < (j + 1) * l; ++y) s += Jg(x, y);
            // s equals l²J̄(i,j), or l(l-1)J̄(i,i) on the diagonal
            H -= (i == j ? 0.5 : 1.0) * s * m[i] * m[j];
        }
    return H;
}

} // namespace mrfuq::ising
