#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "../errors.hpp"
#include "../optimize.hpp"
#include "perturb.hpp"

namespace mrfuq::ising {

/// I(m) with I(±1) = 0.
inline double mf_entropy(double m) {
    if (!(std::abs(m) <= 1.0)) throw DomainError("magnetization outside [-1,1]");
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    return -xlogx((1.0 - m) / 2.0) - xlogx((1.0 + m) / 2.0);
}

/// φ(m) = -(𝒥/2)m² - hm - I(m)/β.
inline double mean_field_potential(double m, double beta, double h, double J) {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    return -0.5 * J * m * m - h * m - mf_entropy(m) / beta;
}

struct LpPressure {
    double pressure = 0.0;
    std::vector<double> minimizers;  // ascending; two entries on the coexistence line

    double m_minus() const { return minimizers.front(); }
    double m_plus() const { return minimizers.back(); }
};

namespace detail {

inline double log2cosh(double v) {
    double a = std::abs(v);
    return a + std::log1p(std::exp(-2.0 * a));
}

inline LpPressure lp_pressure_uncached(double beta, double h, double J) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
    // stationary points m = tanh(u) with u = β(𝒥 tanh u + h)
    auto s = [&](double u) { return u - beta * (J * std::tanh(u) + h); };
    double U = beta * (std::abs(J) + std::abs(h)) + 1.0;
    const int N = 4000;
    std::vector<double> roots;
    double u0 = -U, s0 = s(u0);
    for (int k = 1; k <= N; ++k) {
        double u1 = -U + 2.0 * U * k / N, s1 = s(u1);
        if (s0 == 0.0) roots.push_back(u0);
        else if ((s0 < 0.0) != (s1 < 0.0) && s1 != 0.0) {
            double a = u0, b = u1, sa = s0;
            for (int it = 0; it < 200 && b - a > 0.0; ++it) {
                double mid = 0.5 * (a + b);
                if (mid <= a || mid >= b) break;
                double sm = s(mid);
                if (sm == 0.0) { a = b = mid; break; }
                if ((sm < 0.0) == (sa < 0.0)) { a = mid; sa = sm; }
                else b = mid;
            }
            roots.push_back(0.5 * (a + b));
        }
        u0 = u1;
        s0 = s1;
    }
    if (s0 == 0.0) roots.push_back(u0);

    // value at a stationary point: -𝒥m²/2 + log(2cosh β(𝒥m+h))/β
    std::vector<std::pair<double, double>> cand;
    for (double u : roots) {
        double m = std::tanh(u);
        cand.emplace_back(-0.5 * J * m * m + log2cosh(beta * (J * m + h)) / beta, m);
    }
    for (double m : {-1.0, 1.0}) cand.emplace_back(h * m + 0.5 * J, m);
    double best = -std::numeric_limits<double>::infinity();
    for (auto& [v, m] : cand) best = std::max(best, v);
    LpPressure out;
    out.pressure = best;
    double tol = 1e-12 * std::max(1.0, std::abs(best));
    for (auto& [v, m] : cand)
        if (best - v <= tol) out.minimizers.push_back(m);
    std::sort(out.minimizers.begin(), out.minimizers.end());
    out.minimizers.erase(std::unique(out.minimizers.begin(), out.minimizers.end(),
                                     [](double a, double b) { return std::abs(a - b) < 1e-10; }),
                         out.minimizers.end());
    return out;
}

} // namespace detail

// Memo on (β, h, 𝒥); concurrent readers, exclusive insertion.
class LpMemo {
public:
    LpPressure get(double beta, double h, double J) {
        auto key = std::make_tuple(beta, h, J);
        {
            std::shared_lock lock(mu_);
            auto it = table_.find(key);
            if (it != table_.end()) return it->second;
        }
        LpPressure v = detail::lp_pressure_uncached(beta, h, J);
        std::unique_lock lock(mu_);
        if (table_.size() > 1'000'000) table_.clear();
        return table_.emplace(key, std::move(v)).first->second;
    }
    std::size_t size() const {
        std::shared_lock lock(mu_);
        return table_.size();
    }
    void clear() {
        std::unique_lock lock(mu_);
        table_.clear();
    }

private:
    mutable std::shared_mutex mu_;
    std::map<std::tuple<double, double, double>, LpPressure> table_;
};

inline LpMemo& lp_memo() {
    static LpMemo memo;
    return memo;
}

/// p = sup_m {hm + 𝒥m²/2 + I(m)/β} with all maximizers.
inline LpPressure lp_pressure(double beta, double h, double J) { return lp_memo().get(beta, h, J); }

enum class PhasePerturbationKind { kac, truncation, long_range };

inline const char* to_string(PhasePerturbationKind k) {
    switch (k) {
    case PhasePerturbationKind::kac: return "kac";
    case PhasePerturbationKind::truncation: return "truncation";
    case PhasePerturbationKind::long_range: return "long-range";
    }
    return "?";
}

struct PhasePerturbation {
    PhasePerturbationKind kind = PhasePerturbationKind::kac;
    double a = 0.0;         // kac: 𝒥̃ = (1+a)𝒥; long-range amplitude
    double epsilon = 0.0;   // truncation
    double J_sup = 1.0;     // ‖J‖∞ for truncation
    double gamma = 0.0;     // long-range

    /// 𝓕 entering the band.
    double strength(double J) const {
        switch (kind) {
        case PhasePerturbationKind::kac: return std::abs(a) * std::abs(J);
        case PhasePerturbationKind::truncation: return epsilon * J_sup;
        case PhasePerturbationKind::long_range: return 0.0;  // vanishes in the LP limit
        }
        return 0.0;
    }
};

/// 2∫_{1-ε}^{1} J(r) dr, the exact 1-D tail removed by truncation.
inline double truncation_tail_exact(const Profile& p, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0,1)");
    double a = (1.0 - eps) * p.support, b = p.support;
    const int n = 2000;
    double hstep = (b - a) / n, s = p.value(a) + p.value(b);
    for (int k = 1; k < n; ++k) s += p.value(a + k * hstep) * (k % 2 ? 4.0 : 2.0);
    return 2.0 * s * hstep / 3.0;
}

struct PhaseBandPoint {
    double h = 0.0;
    double m_minus = 0.0, m_plus = 0.0;  // extreme baseline minimizers
    double lower = 0.0, upper = 0.0;
    double lambda_upper = 0.0, lambda_lower = 0.0;
    bool ok = true;
    std::string error;
};

struct PhaseBand {
    BandMethod method = BandMethod::theorem;
    double beta = 0.0, J = 0.0, h_offset = 0.0, strength = 0.0;
    std::vector<PhaseBandPoint> points;
};

namespace detail {

// One side of the LP-limit band; sgn = +1 upper, -1 lower.
inline std::pair<double, double> lp_band_side(double beta, double h, double J, double N0_theorem,
                                              double C, double sgn) {
    double c0 = sgn * C;
    double lo = std::max(0.0, c0);
    double p0 = lp_pressure(beta, h, J).pressure;
    auto Lam = [&](double l) {  // Λ_g(l) for g = sgn·f, per site
        return l == 0.0 ? 0.0 : beta * (lp_pressure(beta, h + sgn * l / beta, J).pressure - p0);
    };
    double Llo = Lam(lo);
    GibbsProblem pb;
    pb.cgf = [&](double s) { return Lam(lo + s) - Llo; };
    double K = N0_theorem;
    if (C != 0.0) K -= beta * (lp_pressure(beta, h + C / beta, J).pressure - p0);
    pb.N0 = Llo + K;
    if (pb.N0 < 0.0 && pb.N0 > -1e-14) pb.N0 = 0.0;
    pb.d = lo - c0;
    LpPressure at = lp_pressure(beta, h + sgn * lo / beta, J);
    pb.mean = sgn > 0 ? at.m_plus() : -at.m_minus();
    pb.sup = 1.0;
    GibbsSolution sol = minimize_gibbs(pb);
    return {sgn * sol.value, lo + sol.s};
}

} // namespace detail

/// LP-limit magnetization band over an ascending h grid.
inline PhaseBand phase_band(double beta, const std::vector<double>& h_grid, double J,
                            const PhasePerturbation& pert, double h_offset, BandMethod method,
                            unsigned threads = 0) {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    for (std::size_t i = 1; i < h_grid.size(); ++i)
        if (!(h_grid[i] > h_grid[i - 1])) throw InputError("field grid must be ascending");
    PhaseBand band;
    band.method = method;
    band.beta = beta;
    band.J = J;
    band.h_offset = h_offset;
    band.strength = pert.strength(J);
    band.points.resize(h_grid.size());
    double C = beta * h_offset;

    auto work = [&](std::size_t i) {
        PhaseBandPoint& pt = band.points[i];
        pt.h = h_grid[i];
        LpPressure lp = lp_pressure(beta, pt.h, J);
        pt.m_minus = lp.m_minus();
        pt.m_plus = lp.m_plus();
        if (method == BandMethod::norm1) {
            double N0 = norm1_kl_upper(beta, 0.0, h_offset, band.strength);
            std::tie(pt.upper, pt.lambda_upper) = detail::lp_band_side(beta, pt.h, J, N0, 0.0, 1.0);
            std::tie(pt.lower, pt.lambda_lower) = detail::lp_band_side(beta, pt.h, J, N0, 0.0, -1.0);
            return;
        }
        if (!(C < 1.0)) {
            pt.ok = false;
            pt.error = "beta*(h~ - h) >= 1";
            pt.lower = pt.upper = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        double N0 = beta * band.strength;
        std::tie(pt.upper, pt.lambda_upper) = detail::lp_band_side(beta, pt.h, J, N0, C, 1.0);
        std::tie(pt.lower, pt.lambda_lower) = detail::lp_band_side(beta, pt.h, J, N0, C, -1.0);
    };

    std::size_t n = h_grid.size();
    unsigned hw = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    std::size_t workers = std::min<std::size_t>(hw, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += workers) work(i);
                } catch (...) {
                    errs[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    return band;
}

/// Mean-field magnetization branches of the perturbed model at field h̃.
inline LpPressure perturbed_mean_field(double beta, double h_tilde, double J_tilde) {
    return lp_pressure(beta, h_tilde, J_tilde);
}

} // namespace mrfuq::ising
