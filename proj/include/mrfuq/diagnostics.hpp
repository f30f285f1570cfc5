#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "factor_model.hpp"
#include "optimize.hpp"
#include "perturbation.hpp"
#include "uq.hpp"

namespace mrfuq {

// Four-node diagnostics example: S(0) - L(1) - {A(2), C(3)}, A - C.
// B_c lives on the clique {S,L}; the alternative event B̃ on {S,L,C}.
struct DiagnosticsScenario {
    double p_I = 0.2;   // base probability of B_c
    double p_II = 0.0;  // base probability of B̃
    double pA = 0.3;    // base probability of the event of interest
    double w_c = 1.5;
    double a = 0.0;     // relative weight change
    double pU = 0.0;    // base probability of B_c ∩ B̃

    void validate() const {
        auto prob = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0))
                throw InputError(std::string(name) + " must lie in [0,1]");
        };
        prob(p_I, "p_I");
        prob(p_II, "p_II");
        prob(pA, "pA");
        prob(pU, "pU");
        if (!std::isfinite(w_c) || !std::isfinite(a)) throw InputError("w_c and a must be finite");
        if (pU > std::min(p_I, p_II) + 1e-15) throw InputError("pU exceeds min(p_I, p_II)");
        if (p_I + p_II - pU > 1.0 + 1e-15) throw InputError("p_I + p_II - pU exceeds 1");
    }
};

/// E_p[Φ] for the Type I change w̃_c = (1+a) w_c.
inline double type1_partition(const DiagnosticsScenario& s) {
    return std::exp(s.a * s.w_c) * s.p_I + 1.0 - s.p_I;
}

inline double type1_kl(const DiagnosticsScenario& s) {
    double z = type1_partition(s);
    return s.a * s.w_c * std::exp(s.a * s.w_c) * s.p_I / z - std::log(z);
}

/// E_p[Φ] for the added edge with overlapping events.
inline double type2_partition_overlap(const DiagnosticsScenario& s) {
    s.validate();
    double w = s.w_c, a = s.a;
    return std::exp((1 + a) * w) * (s.p_II - s.pU) + std::exp(-w) * (s.p_I - s.pU) +
           std::exp(a * w) * s.pU + 1.0 - s.p_I - s.p_II + s.pU;
}

inline double type2_partition_disjoint(const DiagnosticsScenario& s) {
    double w = s.w_c, a = s.a;
    return std::exp((1 + a) * w) * s.p_II + std::exp(-w) * s.p_I + 1.0 - s.p_I - s.p_II;
}

/// E_p[Φ log Φ]/E_p[Φ] − log E_p[Φ] for the added edge (overlap allowed).
inline double type2_kl(const DiagnosticsScenario& s) {
    double w = s.w_c, a = s.a;
    double z = type2_partition_overlap(s);
    double e = (1 + a) * w * std::exp((1 + a) * w) * (s.p_II - s.pU) -
               w * std::exp(-w) * (s.p_I - s.pU) + a * w * std::exp(a * w) * s.pU;
    return e / z - std::log(z);
}

namespace detail {

// Gibbs bound for an indicator of probability pA at divergence level kl.
inline BoundReport indicator_bound(double pA, double kl, Direction dir) {
    double sgn = dir == Direction::upper ? 1.0 : -1.0;
    GibbsProblem p;
    p.cgf = [pA, sgn](double l) {
        double x = sgn * l;
        // log(pA e^x + 1 − pA)
        if (x > 1.0) return x + std::log(pA + (1.0 - pA) * std::exp(-x));
        return std::log1p(pA * std::expm1(x));
    };
    p.N0 = std::max(0.0, kl);
    p.mean = sgn * pA;
    p.sup = dir == Direction::upper ? (pA > 0 ? 1.0 : 0.0) : (pA < 1 ? 0.0 : -1.0);
    GibbsSolution sol = minimize_gibbs(p);
    BoundReport r;
    r.direction = dir;
    r.value = sgn * sol.value;
    r.lambda_star = sol.s;
    r.endpoint = sol.endpoint;
    r.kl = p.N0;
    return r;
}

} // namespace detail

inline BoundReport type1_bounds(const DiagnosticsScenario& s, Direction dir) {
    s.validate();
    return detail::indicator_bound(s.pA, type1_kl(s), dir);
}

inline BoundReport type2_bounds_disjoint(const DiagnosticsScenario& s, Direction dir) {
    s.validate();
    if (s.pU != 0.0) throw InputError("events overlap; use the overlap path");
    return detail::indicator_bound(s.pA, type2_kl(s), dir);
}

inline BoundReport type2_bounds_overlap(const DiagnosticsScenario& s, Direction dir) {
    s.validate();
    return detail::indicator_bound(s.pA, type2_kl(s), dir);
}

// Concrete models realizing a scenario.
//
// B_c = {L = 0}; node S only enters through the {S,L} factor and stays uniform
// given L. The {L,A,C} factor carries log π − w_c·1[L=0], where π is the target
// joint of (L,A,C): A is independent with P(A=0) = pA, and C splits each L-half
// into the parts inside and outside B̃. B̃ is a set of (L,C) cells.
struct RealizedDiagnostics {
    LogLinearModel base;
    LogLinearModel alt_type1;
    LogLinearModel alt_type2;
    std::vector<double> event;  // indicator of A over base states
    std::vector<double> b_c;    // indicator of B_c
    std::vector<double> b_tilde;
};

inline RealizedDiagnostics realize(const DiagnosticsScenario& s) {
    s.validate();
    if (!(s.p_I > 0.0 && s.p_I < 1.0))
        throw InputError("realization needs 0 < p_I < 1");
    // (probability of cell C=0, probability of cell C=1, B̃ membership per cell)
    struct Half {
        double c0, c1;
        bool in0, in1;
    };
    auto split = [](double inside, double outside) {
        if (inside <= 0.0) return Half{0.5 * outside, 0.5 * outside, false, false};
        if (outside <= 0.0) return Half{0.5 * inside, 0.5 * inside, true, true};
        return Half{inside, outside, true, false};
    };
    Half h0 = split(s.pU, s.p_I - s.pU);
    Half h1 = split(s.p_II - s.pU, std::max(0.0, 1.0 - s.p_I - s.p_II + s.pU));
    double pi_lc[2][2] = {{h0.c0, h0.c1}, {h1.c0, h1.c1}};
    bool in_bt[2][2] = {{h0.in0, h0.in1}, {h1.in0, h1.in1}};

    bool a_empty = s.pA <= 0.0, a_full = s.pA >= 1.0;
    double pa0 = (a_empty || a_full) ? 0.5 : s.pA;
    auto in_a = [&](std::size_t ya) { return a_full || (!a_empty && ya == 0); };

    UndirectedGraph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(1, 3);
    g.add_edge(2, 3);

    std::vector<double> fc(4);  // index y_S + 2 y_L
    for (std::size_t ys = 0; ys < 2; ++ys)
        for (std::size_t yl = 0; yl < 2; ++yl) fc[ys + 2 * yl] = yl == 0 ? 1.0 : 0.0;
    std::vector<double> t(8);  // index y_L + 2 y_A + 4 y_C
    for (std::size_t yl = 0; yl < 2; ++yl)
        for (std::size_t ya = 0; ya < 2; ++ya)
            for (std::size_t yc = 0; yc < 2; ++yc) {
                double pa = ya == 0 ? pa0 : 1.0 - pa0;
                t[yl + 2 * ya + 4 * yc] =
                    std::log(pi_lc[yl][yc] * pa) - s.w_c * (yl == 0 ? 1.0 : 0.0);
            }

    RealizedDiagnostics r;
    r.base = LogLinearModel(g, {2, 2, 2, 2}, {{{0, 1}, s.w_c, fc}, {{1, 2, 3}, 1.0, t}});
    r.alt_type1 =
        LogLinearModel(g, {2, 2, 2, 2}, {{{0, 1}, (1 + s.a) * s.w_c, fc}, {{1, 2, 3}, 1.0, t}});
    UndirectedGraph g2 = g;
    g2.add_edge(0, 3);
    std::vector<double> ft(8);  // index y_S + 2 y_L + 4 y_C
    for (std::size_t ys = 0; ys < 2; ++ys)
        for (std::size_t yl = 0; yl < 2; ++yl)
            for (std::size_t yc = 0; yc < 2; ++yc) ft[ys + 2 * yl + 4 * yc] = in_bt[yl][yc] ? 1.0 : 0.0;
    r.alt_type2 =
        LogLinearModel(g2, {2, 2, 2, 2}, {{{0, 1, 3}, (1 + s.a) * s.w_c, ft}, {{1, 2, 3}, 1.0, t}});

    auto sp = r.base.state_space();
    r.event = observe(sp, [&](const Configuration& x) { return in_a(x[2]) ? 1.0 : 0.0; });
    r.b_c = observe(sp, [&](const Configuration& x) { return x[1] == 0 ? 1.0 : 0.0; });
    r.b_tilde = observe(sp, [&](const Configuration& x) { return in_bt[x[1]][x[3]] ? 1.0 : 0.0; });
    return r;
}

struct EventGraphClassification {
    PerturbationType ptype = PerturbationType::TypeI;
    std::vector<std::pair<NodeId, NodeId>> added_edges;
};

/// Graph needed to carry the tilt e^{λ 1_A}: pairs on which the indicator
/// has a non-vanishing mixed difference must be edges.
inline EventGraphClassification tilted_event_graph(const LogLinearModel& base,
                                                   std::span<const double> indicator) {
    StateSpace sp = base.state_space();
    if (indicator.size() != sp.size()) throw InputError("event indicator has wrong length");
    std::size_t n = base.node_count();
    std::vector<std::vector<bool>> inter(n, std::vector<bool>(n, false));
    Configuration x(n, 0);
    for (std::size_t idx = 0; idx < indicator.size(); ++idx, sp.next(x)) {
        for (NodeId i = 0; i < n; ++i) {
            if (x[i] == 0) continue;
            for (NodeId j = i + 1; j < n; ++j) {
                if (x[j] == 0 || inter[i][j]) continue;
                Configuration y = x;
                y[i] = 0;
                double gi = indicator[sp.encode(y)];
                y[j] = 0;
                double gij = indicator[sp.encode(y)];
                y[i] = x[i];
                double gj = indicator[sp.encode(y)];
                if (indicator[idx] - gi - gj + gij != 0.0) inter[i][j] = true;
            }
        }
    }
    EventGraphClassification out;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (inter[i][j] && !base.graph().adjacent(i, j)) out.added_edges.emplace_back(i, j);
    if (!out.added_edges.empty()) out.ptype = PerturbationType::TypeII;
    return out;
}

} // namespace mrfuq
