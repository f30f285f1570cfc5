#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "factor_model.hpp"
#include "logmath.hpp"
#include "optimize.hpp"
#include "perturbation.hpp"

namespace mrfuq {

enum class Direction { upper, lower };

inline const char* to_string(Direction d) { return d == Direction::upper ? "upper" : "lower"; }

struct BoundReport {
    Direction direction = Direction::upper;
    double value = 0.0;
    double lambda_star = 0.0;
    Endpoint endpoint = Endpoint::none;
    double kl = 0.0;
    std::vector<std::pair<double, double>> objective_trace;
};

/// log Φ = C·f + κ, with κ given per state.
struct QoILinearForm {
    double C = 0.0;
    std::vector<double> kappa;
};

/// Λ(λ) = log E_q[e^{λf}], centred at E_q[f] so small λ keeps full precision.
inline double cgf(const Measure& q, std::span<const double> f, double lambda) {
    if (lambda == 0.0) return 0.0;
    double mean = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < q.size(); ++i) {
        mean += std::exp(q.log_p[i]) * f[i];
        lo = std::min(lo, f[i]);
        hi = std::max(hi, f[i]);
    }
    if (std::abs(lambda) * (hi - lo) < 1.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i)
            s += std::exp(q.log_p[i]) * std::expm1(lambda * (f[i] - mean));
        return lambda * mean + std::log1p(s);
    }
    LogSumExp acc;
    for (std::size_t i = 0; i < q.size(); ++i) acc.add(q.log_p[i] + lambda * (f[i] - mean));
    return lambda * mean + acc.value();
}

/// E_q̃[g] computed through the base measure and Φ.
inline double alt_expectation(const Measure& q, std::span<const double> log_phi,
                              std::span<const double> g) {
    double lz = log_mean_phi(q, log_phi);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += std::exp(q.log_p[i] + log_phi[i] - lz) * g[i];
    return s;
}

/// E_q[ΦlogΦ]/E_q[Φ] − log E_q[Φ]; log Φ is shifted by its base mean first.
inline double kl_divergence(const Measure& q, std::span<const double> log_phi) {
    double ref = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) ref += std::exp(q.log_p[i]) * log_phi[i];
    std::vector<double> l(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) l[i] = log_phi[i] - ref;
    double lz = cgf(q, l, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += std::exp(q.log_p[i] + l[i] - lz) * l[i];
    return std::max(0.0, s - lz);
}

template <class Model>
double kl_divergence(const Model& base, const ExcessFactor& ef) {
    return kl_divergence(enumerate(base), log_phi_vector(base, ef));
}

/// q^λ ∝ e^{λf} q.
inline Measure tilt(const Measure& q, std::span<const double> f, double lambda) {
    std::vector<double> lw(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) lw[i] = q.log_p[i] + lambda * f[i];
    Measure t = Measure::from_log_weights(q.space, std::move(lw));
    t.log_z += q.log_z;
    return t;
}

namespace detail {

inline void check_linear_form(std::span<const double> f, std::span<const double> log_phi,
                              const QoILinearForm& lf) {
    if (lf.kappa.size() != log_phi.size()) throw InputError("kappa has wrong length");
    for (std::size_t i = 0; i < log_phi.size(); ++i) {
        double r = lf.C * f[i] + lf.kappa[i];
        if (std::abs(r - log_phi[i]) > 1e-10 * std::max(1.0, std::abs(log_phi[i])))
            throw InputError("log excess factor is not C*f + kappa at state " + std::to_string(i));
    }
}

// E_q̃[κ] − log E_q[Φ], written as R − C E_q̃[f] so that C = 0 reproduces R bit for bit.
inline double linear_offset(const Measure& q, std::span<const double> f,
                            std::span<const double> log_phi, const QoILinearForm& lf) {
    double kl = kl_divergence(q, log_phi);
    if (lf.C == 0.0) return kl;
    return kl - lf.C * alt_expectation(q, log_phi, f);
}

// Minimize (Λ(±λ) + K)/(λ ∓ C) over λ > max(0, ±C) by re-centring at that point.
inline BoundReport solve(const Measure& q, std::span<const double> f, double K, double C,
                         Direction dir, bool trace) {
    double sgn = dir == Direction::upper ? 1.0 : -1.0;
    double c0 = sgn * C;
    double lo = std::max(0.0, c0);
    std::vector<double> g(f.begin(), f.end());
    for (double& v : g) v *= sgn;
    Measure base = lo > 0.0 ? tilt(q, g, lo) : q;
    GibbsProblem p;
    p.cgf = [&base, &g](double s) { return cgf(base, g, s); };
    p.N0 = lo > 0.0 ? cgf(q, g, lo) + K : K;
    if (p.N0 < 0.0 && p.N0 > -1e-14) p.N0 = 0.0;
    p.d = lo - c0;
    p.mean = expectation(base, g);
    p.sup = *std::max_element(g.begin(), g.end());
    GibbsSolution s = minimize_gibbs(p, trace);
    BoundReport r;
    r.direction = dir;
    r.value = sgn * s.value;
    r.lambda_star = lo + s.s;
    r.endpoint = s.endpoint;
    for (auto [x, v] : s.trace) r.objective_trace.emplace_back(lo + x, sgn * v);
    return r;
}

} // namespace detail

/// Gibbs variational bound over the KL ball of radius eta.
inline BoundReport uq_bound_eta(const Measure& q, std::span<const double> f, double eta,
                                Direction dir, bool trace = false) {
    if (!(eta >= 0.0)) throw InputError("divergence level must be non-negative");
    BoundReport r = detail::solve(q, f, eta, 0.0, dir, trace);
    r.kl = eta;
    return r;
}

inline BoundReport uq_bound_model(const Measure& q, std::span<const double> f,
                                  std::span<const double> log_phi, Direction dir,
                                  bool trace = false) {
    double kl = kl_divergence(q, log_phi);
    BoundReport r = detail::solve(q, f, kl, 0.0, dir, trace);
    r.kl = kl;
    return r;
}

/// Bound using log Φ = C f + κ; valid rearrangement E f ≤ inf_{λ>C⁺}(Λ(λ)+K)/(λ−C).
inline BoundReport uq_bound_linear(const Measure& q, std::span<const double> f,
                                   std::span<const double> log_phi, const QoILinearForm& lf,
                                   Direction dir, bool trace = false) {
    if (!(std::abs(lf.C) < 1.0)) throw PreconditionError("linear form requires |C| < 1");
    detail::check_linear_form(f, log_phi, lf);
    double K = detail::linear_offset(q, f, log_phi, lf);
    BoundReport r = detail::solve(q, f, K, lf.C, dir, trace);
    r.kl = kl_divergence(q, log_phi);
    return r;
}

/// R(q̃‖q) through the linear decomposition: C E_q̃[f] + E_q̃[κ] − log E_q[Φ].
inline double kl_linear_form(const Measure& q, std::span<const double> f,
                             std::span<const double> log_phi, const QoILinearForm& lf) {
    detail::check_linear_form(f, log_phi, lf);
    double lz = log_mean_phi(q, log_phi);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
        s += std::exp(q.log_p[i] + log_phi[i] - lz) * lf.kappa[i];
    return lf.C * alt_expectation(q, log_phi, f) + s - lz;
}

/// Excess factor of the tilted measure: one term over every node, Φ = e^{λf}.
inline ExcessFactor tilt_excess_factor(const LogLinearModel& base, std::span<const double> f,
                                       double lambda) {
    ExcessFactor ef(base.cardinalities());
    NodeSet all;
    for (NodeId v = 0; v < base.node_count(); ++v) all.push_back(v);
    std::vector<double> t(f.begin(), f.end());
    for (double& v : t) v *= lambda;
    ef.add({all, std::move(t)});
    return ef;
}

/// R(q^λ‖q) = λ E_λ[f] − Λ(λ).
inline double tilted_divergence(const Measure& q, std::span<const double> f, double lambda) {
    if (lambda == 0.0) return 0.0;
    double lz = cgf(q, f, lambda);
    double m = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) m += std::exp(q.log_p[i] + lambda * f[i] - lz) * f[i];
    return std::max(0.0, lambda * m - lz);
}

struct TightnessLambdas {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;  // tilt parameter of the lower bound, <= 0
};

/// Solve R(q^{λ±}‖q) = η on each side by bisection.
inline TightnessLambdas tightness_lambda(const Measure& q, std::span<const double> f, double eta,
                                         double lambda_cap = 1e6) {
    if (!(eta >= 0.0)) throw InputError("divergence level must be non-negative");
    double lo_f = *std::min_element(f.begin(), f.end());
    double hi_f = *std::max_element(f.begin(), f.end());
    if (!(hi_f > lo_f)) throw InputError("observable is constant");
    TightnessLambdas out;
    if (eta == 0.0) return out;
    auto side = [&](double sgn) {
        double hi = 1.0 / (hi_f - lo_f);
        while (tilted_divergence(q, f, sgn * hi) < eta) {
            if (hi >= lambda_cap)
                throw RangeError("divergence level " + std::to_string(eta) +
                                     " exceeds the achievable maximum",
                                 tilted_divergence(q, f, sgn * hi));
            hi *= 2.0;
        }
        double root = bisect([&](double l) { return tilted_divergence(q, f, sgn * l) - eta; }, 0.0,
                             hi);
        return sgn * root;
    };
    out.lambda_plus = side(1.0);
    out.lambda_minus = side(-1.0);
    return out;
}

} // namespace mrfuq
