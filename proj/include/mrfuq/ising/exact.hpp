#pragma once

#include <algorithm>
#include <bit>
#include <map>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "../errors.hpp"
#include "../factor_model.hpp"
#include "../graph.hpp"
#include "../uq.hpp"
#include "lattice.hpp"
#include "monte_carlo.hpp"

namespace mrfuq::ising {

inline StateSpace spin_space(std::size_t n) { return StateSpace(std::vector<std::size_t>(n, 2)); }

namespace detail {

// Fill out[i] = g(i) over [0, n) with contiguous chunks per thread.
template <class G>
void parallel_fill(std::vector<double>& out, G&& g) {
    std::size_t n = out.size();
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t workers = std::min<std::size_t>(hw, n / 4096 + 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = g(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([&out, &g, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) out[i] = g(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline double energy_of_index(const SpinHamiltonian& H, std::size_t idx) {
    double e = 0.0;
    for (const auto& p : H.pairs) {
        int si = (idx >> p.i) & 1 ? 1 : -1;
        int sj = (idx >> p.j) & 1 ? 1 : -1;
        e -= p.J * si * sj;
    }
    for (std::size_t x = 0; x < H.field.size(); ++x) e -= H.field[x] * ((idx >> x) & 1 ? 1 : -1);
    return e;
}

} // namespace detail

/// Conditional Gibbs measure e^{-βH}/Z over all 2^|Δ| configurations.
inline Measure gibbs_measure(const LatticeSystem& sys) {
    SpinHamiltonian H = spin_hamiltonian(sys);
    StateSpace sp = spin_space(sys.box.size());
    std::vector<double> lw(sp.size());
    double beta = sys.beta;
    detail::parallel_fill(lw, [&](std::size_t i) { return -beta * detail::energy_of_index(H, i); });
    return Measure::from_log_weights(std::move(sp), std::move(lw));
}

/// H at every state in index order.
inline std::vector<double> energy_vector(const LatticeSystem& sys) {
    SpinHamiltonian H = spin_hamiltonian(sys);
    std::vector<double> e(spin_space(sys.box.size()).size());
    detail::parallel_fill(e, [&](std::size_t i) { return detail::energy_of_index(H, i); });
    return e;
}

/// f = |Δ| m = Sum_x σ_x per state.
inline std::vector<double> total_spin(std::size_t n) {
    std::vector<double> f(spin_space(n).size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = 2.0 * static_cast<double>(std::popcount(i)) - static_cast<double>(n);
    return f;
}

/// Clique-factorised conditional model: one log-linear factor per maximal
/// clique of the interaction graph on Δ plus the boundary sites in range,
/// then reduced on the boundary. Free nodes keep the box site order.
inline ReducedModel rmrf_clique_potentials(const LatticeSystem& sys) {
    sys.validate();
    if (!sys.kernel.finite_range()) throw InputError("clique potentials need a finite-range kernel");
    const Box& box = sys.box;
    std::size_t n = box.size();
    std::vector<Coord> bsites;
    if (sys.boundary.kind != BoundaryKind::free) bsites = boundary_sites(box, sys.kernel);
    std::map<Coord, std::size_t> bindex;
    for (std::size_t k = 0; k < bsites.size(); ++k) bindex.emplace(bsites[k], n + k);

    UndirectedGraph g(n + bsites.size());
    struct Term {
        NodeId a, b;  // b == a for a site term
        double w;
    };
    std::vector<Term> terms;
    for (const auto& p : in_box_pairs(box, sys.kernel)) {
        g.add_edge(p.i, p.j);
        terms.push_back({p.i, p.j, p.J});
    }
    if (!bsites.empty()) {
        auto offs = kernel_offsets(sys.kernel);
        for (std::size_t i = 0; i < n; ++i) {
            Coord x = box.coord(i);
            for (const auto& o : offs) {
                Coord y = x;
                for (int t = 0; t < box.d; ++t) y[t] += o.r[t];
                if (box.contains(y)) continue;
                NodeId yb = bindex.at(y);
                g.add_edge(i, yb);
                terms.push_back({i, yb, o.value});
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) terms.push_back({i, i, sys.h});

    CliqueSet cliques = maximal_cliques(g);
    std::vector<std::size_t> card(g.node_count(), 2);
    std::vector<Factor> factors;
    for (const auto& c : cliques) {
        std::size_t sz = std::size_t{1} << c.size();
        factors.push_back({c, sys.beta, std::vector<double>(sz, 0.0)});
    }
    auto contains = [](const NodeSet& c, NodeId v) { return std::binary_search(c.begin(), c.end(), v); };
    for (const auto& t : terms) {
        std::size_t k = 0;
        while (!(contains(cliques[k], t.a) && contains(cliques[k], t.b))) ++k;
        const NodeSet& c = cliques[k];
        std::size_t pa = std::lower_bound(c.begin(), c.end(), t.a) - c.begin();
        std::size_t pb = std::lower_bound(c.begin(), c.end(), t.b) - c.begin();
        auto& tab = factors[k].feature;
        for (std::size_t idx = 0; idx < tab.size(); ++idx) {
            int sa = (idx >> pa) & 1 ? 1 : -1;
            int sb = (idx >> pb) & 1 ? 1 : -1;
            tab[idx] += t.a == t.b ? t.w * sa : t.w * sa * sb;
        }
    }
    LogLinearModel full(std::move(g), std::move(card), std::move(factors));
    NodeSet ctx;
    std::vector<std::size_t> vals;
    for (std::size_t k = 0; k < bsites.size(); ++k) {
        ctx.push_back(n + k);
        vals.push_back(sys.boundary.at(bsites[k]) > 0 ? 1 : 0);
    }
    return reduce(full, ctx, vals);
}

struct PressureOptions {
    bool allow_monte_carlo = false;
    MetropolisOptions mc;
    std::size_t beta_points = 17;  // Simpson nodes for thermodynamic integration
};

/// log Z_σ̄(J, β, h) by enumeration.
inline double ising_log_partition(const LatticeSystem& sys) { return gibbs_measure(sys).log_z; }

namespace detail {

// log Z(β) = |Δ| log 2 - ∫_0^β <H>_b db with Metropolis estimates of <H>.
inline double log_partition_mc(const LatticeSystem& sys, const PressureOptions& opt) {
    std::size_t m = opt.beta_points < 3 ? 3 : opt.beta_points | 1;
    double step = sys.beta / static_cast<double>(m - 1);
    double integral = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        LatticeSystem s = sys;
        s.beta = step * static_cast<double>(k);
        MetropolisOptions mo = opt.mc;
        mo.seed = opt.mc.seed + k;
        double e = metropolis(s, mo).mean_energy;
        double w = (k == 0 || k + 1 == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        integral += w * e;
    }
    integral *= step / 3.0;
    return static_cast<double>(sys.box.size()) * std::log(2.0) - integral;
}

} // namespace detail

/// P = log Z / (β|Δ|); exact when enumerable, otherwise Monte Carlo if allowed.
inline double finite_pressure(const LatticeSystem& sys, const PressureOptions& opt = {}) {
    sys.validate();
    if (!(sys.beta > 0.0)) throw DomainError("pressure needs beta > 0");
    double n = static_cast<double>(sys.box.size());
    try {
        return ising_log_partition(sys) / (sys.beta * n);
    } catch (const CapacityError&) {
        if (!opt.allow_monte_carlo) throw;
    }
    return detail::log_partition_mc(sys, opt) / (sys.beta * n);
}

/// log Z(h + λ/β) - log Z(h): the CGF of Sum_x σ_x.
inline double cgf_magnetization(const LatticeSystem& sys, double lambda) {
    if (lambda == 0.0) return 0.0;
    if (!(sys.beta > 0.0)) throw DomainError("field shift needs beta > 0");
    LatticeSystem shifted = sys;
    shifted.h = sys.h + lambda / sys.beta;
    return ising_log_partition(shifted) - ising_log_partition(sys);
}

/// E[m] per site by enumeration.
inline double mean_magnetization(const LatticeSystem& sys) {
    Measure q = gibbs_measure(sys);
    return expectation(q, total_spin(sys.box.size())) / static_cast<double>(sys.box.size());
}

} // namespace mrfuq::ising
