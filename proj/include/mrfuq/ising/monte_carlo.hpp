#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../errors.hpp"
#include "lattice.hpp"

namespace mrfuq::ising {

struct MetropolisOptions {
    std::uint64_t seed = 1;
    std::size_t sweeps = 2000;
    std::size_t burn_in = 500;
};

struct MetropolisResult {
    double mean_magnetization = 0.0;  // per site
    double mean_energy = 0.0;
    double acceptance = 0.0;
};

/// Single-site Metropolis on the conditional Gibbs measure, started from all plus.
inline MetropolisResult metropolis(const LatticeSystem& sys, const MetropolisOptions& opt) {
    if (opt.sweeps == 0) throw InputError("Metropolis needs at least one sweep");
    SpinHamiltonian H = spin_hamiltonian(sys);
    std::size_t n = sys.box.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> nb(n);
    for (const auto& p : H.pairs) {
        nb[p.i].emplace_back(p.j, p.J);
        nb[p.j].emplace_back(p.i, p.J);
    }
    Spins s(n, 1);
    double e = H.energy(s);
    double m = static_cast<double>(n);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    MetropolisResult r;
    std::size_t accepted = 0, proposed = 0;
    double sum_m = 0.0, sum_e = 0.0;
    for (std::size_t sweep = 0; sweep < opt.burn_in + opt.sweeps; ++sweep) {
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t x = pick(rng);
            double local = H.field[x];
            for (auto [y, J] : nb[x]) local += J * s[y];
            double dE = 2.0 * s[x] * local;
            ++proposed;
            if (dE <= 0.0 || u(rng) < std::exp(-sys.beta * dE)) {
                s[x] = -s[x];
                e += dE;
                m += 2.0 * s[x];
                ++accepted;
            }
        }
        if (sweep >= opt.burn_in) {
            sum_m += m / static_cast<double>(n);
            sum_e += e;
        }
    }
    r.mean_magnetization = sum_m / static_cast<double>(opt.sweeps);
    r.mean_energy = sum_e / static_cast<double>(opt.sweeps);
    r.acceptance = static_cast<double>(accepted) / static_cast<double>(proposed);
    return r;
}

} // namespace mrfuq::ising
