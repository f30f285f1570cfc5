#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace mrfuq {

/// Golden-section minimization of a unimodal g on [a,b]; returns (x*, g(x*)).
inline std::pair<double, double> golden_section(const std::function<double(double)>& g, double a,
                                                double b, double tol = 1e-12, int max_iter = 200) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (gc <= gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    return gc <= gd ? std::pair{c, gc} : std::pair{d, gd};
}

/// Root of an increasing function on [lo,hi] with h(lo) <= 0 <= h(hi).
inline double bisect(const std::function<double(double)>& h, double lo, double hi,
                     double rel_tol = 1e-15, int max_iter = 400) {
    for (int it = 0; it < max_iter; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (h(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

// Problem: minimize (Λ̂(s) + N0) / (s + d) over s > 0, where Λ̂ is a cumulant
// generating function with Λ̂(0) = 0, N0 >= 0 and d >= 0. `mean` is Λ̂'(0+) and
// `sup` the essential supremum of the observable; they give the endpoint limits.
struct GibbsProblem {
    std::function<double(double)> cgf;
    double N0 = 0.0;
    double d = 0.0;
    double mean = 0.0;
    double sup = std::numeric_limits<double>::infinity();
};

enum class Endpoint { none, zero, infinity };

struct GibbsSolution {
    double value = 0.0;
    double s = 0.0;  // optimal s (0 or +inf at an endpoint)
    Endpoint endpoint = Endpoint::none;
    std::vector<std::pair<double, double>> trace;
};

inline GibbsSolution minimize_gibbs(const GibbsProblem& p, bool keep_trace = false) {
    GibbsSolution sol;
    if (p.d == 0.0 && p.N0 <= 0.0) {
        // Λ̂(s)/s >= Λ̂'(0): the infimum is the limit at s -> 0
        sol.value = std::min(p.mean, p.sup);
        sol.endpoint = Endpoint::zero;
        return sol;
    }
    auto obj = [&](double s) {
        double v = (p.cgf(s) + p.N0) / (s + p.d);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    double s_min = 1e-8, s_max = 1e8;
    std::vector<double> grid, vals;
    std::size_t best = 0;
    for (int expand = 0; expand < 6; ++expand) {
        grid = log_grid(s_min, s_max, 64);
        vals.resize(grid.size());
        best = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            vals[i] = obj(grid[i]);
            if (vals[i] < vals[best]) best = i;
        }
        if (best == 0 && s_min > 1e-24)
            s_min *= 1e-4;
        else if (best + 1 == grid.size() && s_max < 1e24)
            s_max *= 1e4;
        else
            break;
    }
    if (keep_trace)
        for (std::size_t i = 0; i < grid.size(); ++i) sol.trace.emplace_back(grid[i], vals[i]);

    std::size_t i0 = best == 0 ? 0 : best - 1;
    std::size_t i1 = std::min(best + 1, grid.size() - 1);
    auto [t, v] = golden_section([&](double u) { return obj(std::exp(u)); }, std::log(grid[i0]),
                                 std::log(grid[i1]));
    if (vals[best] < v) {
        t = std::log(grid[best]);
        v = vals[best];
    }
    sol.value = v;
    sol.s = std::exp(t);

    if (p.d > 0.0 && p.N0 / p.d <= sol.value) {
        sol.value = p.N0 / p.d;
        sol.s = 0.0;
        sol.endpoint = Endpoint::zero;
    }
    if (p.sup < sol.value) {
        sol.value = p.sup;
        sol.s = std::numeric_limits<double>::infinity();
        sol.endpoint = Endpoint::infinity;
    }
    return sol;
}

} // namespace mrfuq
