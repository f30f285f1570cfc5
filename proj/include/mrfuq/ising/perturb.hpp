#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "../errors.hpp"
#include "../perturbation.hpp"
#include "../uq.hpp"
#include "exact.hpp"
#include "kernel.hpp"
#include "lattice.hpp"

namespace mrfuq::ising {

enum class RangeClass { within, beyond };

/// Whether F lives inside the range of J or extends past it.
inline RangeClass range_class(const Kernel& J, const Kernel& F) {
    return F.range() <= J.range() + 1e-12 ? RangeClass::within : RangeClass::beyond;
}

struct IsingExcess {
    ExcessFactor factor;  // over the |Δ| spins, state 0 is -1
    double C = 0.0;       // β(h̃ - h)
};

/// Excess factor of (J + F, h̃) against (J, h) with a shared boundary.
inline IsingExcess excess_factor_ising(const LatticeSystem& sys, const Kernel& F, double h_tilde) {
    sys.validate();
    if (F.dim() != sys.box.d) throw InputError("perturbation and box dimension differ");
    std::size_t n = sys.box.size();
    IsingExcess out;
    out.factor = ExcessFactor(std::vector<std::size_t>(n, 2));
    out.C = sys.beta * (h_tilde - sys.h);
    double b = sys.beta;
    for (const auto& p : in_box_pairs(sys.box, F))
        out.factor.add({{p.i, p.j}, {b * p.J, -b * p.J, -b * p.J, b * p.J}});
    std::vector<double> field = boundary_field(sys.box, sys.boundary, F);
    for (std::size_t x = 0; x < n; ++x) {
        double w = b * ((h_tilde - sys.h) + field[x]);
        if (w != 0.0) out.factor.add({{x}, {-w, w}});
    }
    return out;
}

/// log Φ at every state in index order.
inline std::vector<double> log_phi_vector(const IsingExcess& ex) {
    return observe(spin_space(ex.factor.cardinalities().size()),
                   [&](const Configuration& x) { return ex.factor.evaluate(x); });
}

/// log Φ = C·Sum σ + κ.
inline QoILinearForm ising_linear_form(const IsingExcess& ex) {
    if (!(std::abs(ex.C) < 1.0))
        throw PreconditionError("linear form needs beta*|h~ - h| < 1");
    std::size_t n = ex.factor.cardinalities().size();
    std::vector<double> lphi = log_phi_vector(ex);
    std::vector<double> f = total_spin(n);
    QoILinearForm lf;
    lf.C = ex.C;
    lf.kappa.resize(lphi.size());
    for (std::size_t i = 0; i < lphi.size(); ++i) lf.kappa[i] = lphi[i] - ex.C * f[i];
    return lf;
}

/// β|Δ|(1/2 + 2R_F|∂Δ|/|Δ|) Sum|F|.
inline double kappa_type1_bound(const LatticeSystem& sys, const Kernel& F) {
    double n = static_cast<double>(sys.box.size());
    return sys.beta * n * (0.5 + 2.0 * F.nominal_range() * sys.box.boundary_size() / n) *
           F.abs_sum();
}

enum class BoundaryRegion { inside_range, outside_range };

struct BoundarySum {
    double exact = 0.0;
    double bound = 0.0;
};

/// Sum_{x in Δ} Sum_{y outside Δ, in region} |F(x,y)| and its surface estimate.
/// `R` is the baseline range separating the two regions.
inline BoundarySum boundary_sum_bounds(const Box& box, const Kernel& F, double R,
                                       BoundaryRegion which) {
    BoundarySum out;
    double total = F.abs_sum();
    if (total == 0.0) return out;
    auto in_region = [&](double r) {
        return which == BoundaryRegion::inside_range ? r <= R + 1e-12 : r > R + 1e-12;
    };
    double n = static_cast<double>(box.size());
    if (!F.finite_range()) {
        if (box.d != 1) throw InputError("infinite-range kernels are one-dimensional");
        long Rl = static_cast<long>(std::floor(R + 1e-12));
        for (long x = 0; x < box.L; ++x) {
            for (long first : {x + 1, box.L - x}) {
                if (which == BoundaryRegion::inside_range) {
                    for (long k = first; k <= Rl; ++k) out.exact += std::abs(F.at(static_cast<double>(k)));
                } else {
                    out.exact += std::abs(F.tail(std::max(first, Rl + 1)));
                }
            }
        }
        out.bound = n * total;
        return out;
    }
    for (const auto& o : kernel_offsets(F)) {
        double r = 0.0;
        for (long v : o.r) r += static_cast<double>(v) * static_cast<double>(v);
        if (!in_region(std::sqrt(r))) continue;
        // number of x in the box with x + r outside
        double inside = 1.0;
        for (long v : o.r) inside *= static_cast<double>(std::max(0L, box.L - std::abs(v)));
        out.exact += std::abs(o.value) * (n - inside);
    }
    double RF = F.nominal_range();
    out.bound = static_cast<double>(box.L) < RF ? RF * n * total : RF * box.boundary_size() * total;
    return out;
}

/// 2β(|h̃ - h| + Sum|F|).
inline double norm1_kl_upper(double beta, double h, double h_tilde, double F_abs_sum) {
    return 2.0 * beta * (std::abs(h_tilde - h) + F_abs_sum);
}

enum class BandMethod { theorem, norm1 };

inline const char* to_string(BandMethod m) { return m == BandMethod::theorem ? "theorem" : "norm1"; }

struct FiniteBand {
    BoundReport lower, upper;  // values are per-site magnetizations
    double baseline = 0.0;
    double offset = 0.0;  // η for norm1, K̂ for theorem
    double strength = 0.0;  // Sum|F|
};

namespace detail {

// Bound on E[f] from log Φ = C f + κ with osc κ <= Khat:
// E_q̃ κ - log E_q Φ <= Khat - Λ(C).
inline FiniteBand band_from_offset(const Measure& q, std::span<const double> f, double n,
                                   double Khat, double C) {
    FiniteBand out;
    double K = C == 0.0 ? Khat : Khat - cgf(q, f, C);
    out.upper = mrfuq::detail::solve(q, f, K, C, Direction::upper, false);
    out.lower = mrfuq::detail::solve(q, f, K, C, Direction::lower, false);
    out.upper.value /= n;
    out.lower.value /= n;
    out.offset = Khat;
    out.baseline = expectation(q, f) / n;
    return out;
}

} // namespace detail

/// Finite-volume magnetization band for the perturbed system (J + F, h̃).
/// theorem: Khat = β𝓕(|Δ| + R_F|∂Δ|); norm1: η = 2β|Δ|(|h̃ - h| + 𝓕).
inline FiniteBand finite_size_band(const LatticeSystem& sys, const Kernel& F, double h_tilde,
                                   BandMethod method) {
    sys.validate();
    Measure q = gibbs_measure(sys);
    std::size_t n = sys.box.size();
    std::vector<double> f = total_spin(n);
    double dn = static_cast<double>(n);
    double strength = F.abs_sum();
    FiniteBand out;
    if (method == BandMethod::norm1) {
        double eta = dn * norm1_kl_upper(sys.beta, sys.h, h_tilde, strength);
        out.upper = uq_bound_eta(q, f, eta, Direction::upper);
        out.lower = uq_bound_eta(q, f, eta, Direction::lower);
        out.upper.value /= dn;
        out.lower.value /= dn;
        out.offset = eta;
        out.baseline = expectation(q, f) / dn;
    } else {
        double C = sys.beta * (h_tilde - sys.h);
        if (!(C < 1.0)) throw PreconditionError("theorem band needs beta*(h~ - h) < 1");
        double Khat =
            sys.beta * strength * (dn + F.nominal_range() * sys.box.boundary_size());
        if (!std::isfinite(Khat)) throw InputError("perturbation has no finite range length");
        out = detail::band_from_offset(q, f, dn, Khat, C);
    }
    out.strength = strength;
    return out;
}

struct TailConstant {
    double tail = 0.0;      // Sum_{|y| > (2γ)^{-1}} |a|/y^2 over Z
    double constant = 0.0;  // tail / γ
};

inline TailConstant long_range_tail_constant(double a, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    long first = static_cast<long>(std::floor(1.0 / (2.0 * gamma) + 1e-12)) + 1;
    TailConstant t;
    t.tail = 2.0 * std::abs(a) * inverse_square_tail(first);
    t.constant = t.tail / gamma;
    return t;
}

/// κ_II <= 2β C γ |Δ| for the inverse-square perturbation of the 1-D pwc Kac model.
inline double long_range_kappa_bound(const LatticeSystem& sys, double a, double gamma) {
    if (sys.box.d != 1) throw UnsupportedPerturbation("long-range perturbation is one-dimensional");
    TailConstant t = long_range_tail_constant(a, gamma);
    return 2.0 * sys.beta * t.constant * gamma * static_cast<double>(sys.box.size());
}

/// Theorem-method band with Khat = 2βCγ|Δ|; `sys` carries the pwc Kac baseline.
inline FiniteBand long_range_finite_band(const LatticeSystem& sys, double a, double gamma,
                                         double h_tilde) {
    double C = sys.beta * (h_tilde - sys.h);
    if (!(C < 1.0)) throw PreconditionError("theorem band needs beta*(h~ - h) < 1");
    double Khat = long_range_kappa_bound(sys, a, gamma);
    Measure q = gibbs_measure(sys);
    std::vector<double> f = total_spin(sys.box.size());
    FiniteBand out = detail::band_from_offset(q, f, static_cast<double>(sys.box.size()), Khat, C);
    out.strength = long_range_tail_constant(a, gamma).tail;
    return out;
}

/// Enumerated E_q̃[m] for the perturbed system.
inline double perturbed_magnetization(const LatticeSystem& sys, const Kernel& F, double h_tilde) {
    LatticeSystem alt = sys;
    alt.kernel = combine(sys.kernel, F, 1.0);
    alt.h = h_tilde;
    return mean_magnetization(alt);
}

} // namespace mrfuq::ising
