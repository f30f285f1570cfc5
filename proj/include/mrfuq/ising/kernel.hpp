#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "../errors.hpp"

namespace mrfuq::ising {

/// Even profile J(r) on r >= 0, vanishing beyond `support`.
struct Profile {
    std::string name;
    std::function<double(double)> value;
    double support = 1.0;
    double sup_norm = 1.0;
    double lipschitz = std::numeric_limits<double>::infinity();  // ‖DJ‖∞
};

// (15/16)(1-r^2)^2 on [0,1]; unit integral on the line.
inline Profile bump_profile() {
    Profile p;
    p.name = "bump";
    p.value = [](double r) {
        r = std::abs(r);
        if (r >= 1.0) return 0.0;
        double u = 1.0 - r * r;
        return 15.0 / 16.0 * u * u;
    };
    p.support = 1.0;
    p.sup_norm = 15.0 / 16.0;
    p.lipschitz = 5.0 / (2.0 * std::sqrt(3.0));
    return p;
}

// 1 on |r| <= 1/2.
inline Profile pwc_profile() {
    Profile p;
    p.name = "pwc";
    p.value = [](double r) { return std::abs(r) <= 0.5 ? 1.0 : 0.0; };
    p.support = 0.5;
    p.sup_norm = 1.0;
    return p;
}

/// Sum_{k>=m} 1/k^2 for m >= 1.
inline double inverse_square_tail(long m) {
    if (m < 1) throw InputError("inverse-square tail needs m >= 1");
    double head = 0.0;
    // Euler-Maclaurin once the remainder term drops below 1e-13
    if (m >= 64) {
        double x = static_cast<double>(m);
        return 1.0 / x + 1.0 / (2 * x * x) + 1.0 / (6 * x * x * x) - 1.0 / (30 * std::pow(x, 5)) +
               1.0 / (42 * std::pow(x, 7));
    }
    for (long k = m - 1; k >= 1; --k) head += 1.0 / (static_cast<double>(k) * k);
    return std::numbers::pi * std::numbers::pi / 6.0 - head;
}

// Translation-invariant, symmetric pair interaction depending on Euclidean
// distance. Kernels with infinite range are 1-D only and carry an exact tail.
class Kernel {
public:
    Kernel() = default;

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    double range() const { return range_; }
    /// Nominal length of the range R_F used in boundary estimates.
    double nominal_range() const { return nominal_; }
    bool finite_range() const { return std::isfinite(range_); }
    const std::optional<double>& gamma() const { return gamma_; }
    const std::optional<Profile>& profile() const { return profile_; }

    double at(double r) const { return r <= 0.0 || r > range_ + 1e-12 ? 0.0 : radial_(r); }

    double operator()(std::span<const long> dx) const {
        double s = 0.0;
        for (long v : dx) s += static_cast<double>(v) * static_cast<double>(v);
        return at(std::sqrt(s));
    }

    /// Sum_{k>=m} K(k) on the 1-D lattice.
    double tail(long m) const {
        if (tail_) return tail_(m);
        if (!finite_range()) throw InputError("kernel " + name_ + " has no tail sum");
        double s = 0.0;
        for (long k = std::max(1L, m); k <= static_cast<long>(std::floor(range_ + 1e-12)); ++k)
            s += at(static_cast<double>(k));
        return s;
    }

    /// Sum_{x != 0} |K(0,x)| over Z^d.
    double abs_sum() const {
        if (!finite_range()) {
            if (dim_ != 1) throw InputError("infinite-range kernels are one-dimensional");
            long core = static_cast<long>(std::floor(core_)) + 1;
            double s = 0.0;
            for (long k = 1; k < core; ++k) s += std::abs(at(static_cast<double>(k)));
            return 2.0 * (s + std::abs(tail(core)));
        }
        long R = static_cast<long>(std::floor(range_ + 1e-12));
        std::vector<long> x(dim_, -R);
        double s = 0.0;
        for (;;) {
            s += std::abs((*this)(x));
            int i = 0;
            while (i < dim_ && ++x[i] > R) x[i++] = -R;
            if (i == dim_) break;
        }
        return s;
    }

    /// Plain lattice sum Sum_{x != 0} K(0,x).
    double sum() const {
        if (!finite_range()) return 2.0 * tail(1);
        long R = static_cast<long>(std::floor(range_ + 1e-12));
        std::vector<long> x(dim_, -R);
        double s = 0.0;
        for (;;) {
            s += (*this)(x);
            int i = 0;
            while (i < dim_ && ++x[i] > R) x[i++] = -R;
            if (i == dim_) break;
        }
        return s;
    }

    friend Kernel make_kernel(int d, std::string name, std::function<double(double)> radial,
                              double range, double nominal);
    friend Kernel kac_kernel(int d, const Profile& p, double gamma);
    friend Kernel scaled(const Kernel& k, double c);
    friend Kernel combine(const Kernel& a, const Kernel& b, double cb);
    friend Kernel truncated_kernel(const Kernel& base, double eps);
    friend Kernel long_range_perturbation(double a, double gamma);

private:
    int dim_ = 1;
    std::string name_;
    std::function<double(double)> radial_;
    std::function<double(long)> tail_;
    double range_ = 0.0;
    double nominal_ = 0.0;
    double core_ = 0.0;  // beyond this distance an infinite tail keeps one sign
    std::optional<double> gamma_;
    std::optional<Profile> profile_;
};

inline Kernel make_kernel(int d, std::string name, std::function<double(double)> radial,
                          double range, double nominal) {
    if (d < 1) throw InputError("dimension must be positive");
    Kernel k;
    k.dim_ = d;
    k.name_ = std::move(name);
    k.radial_ = std::move(radial);
    k.range_ = range;
    k.nominal_ = nominal;
    k.core_ = std::isfinite(range) ? range : 0.0;
    return k;
}

inline Kernel zero_kernel(int d) {
    return make_kernel(d, "zero", [](double) { return 0.0; }, 0.0, 0.0);
}

/// Generic kernel from a table keyed by squared lattice distance.
inline Kernel table_kernel(int d, std::map<long, double> by_sqdist) {
    double range = 0.0;
    for (auto& [q, v] : by_sqdist) {
        if (q <= 0) throw InputError("table kernel keys must be positive squared distances");
        if (v != 0.0) range = std::max(range, std::sqrt(static_cast<double>(q)));
    }
    auto tbl = std::make_shared<std::map<long, double>>(std::move(by_sqdist));
    return make_kernel(
        d, "table",
        [tbl](double r) {
            auto it = tbl->find(std::lround(r * r));
            return it == tbl->end() ? 0.0 : it->second;
        },
        range, range);
}

inline Kernel nearest_neighbour_kernel(int d, double J) { return table_kernel(d, {{1, J}}); }

/// J_γ(x,y) = γ^d J(γ|x-y|).
inline Kernel kac_kernel(int d, const Profile& p, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    double scale = std::pow(gamma, d);
    auto f = p.value;
    Kernel k = make_kernel(
        d, "kac-" + p.name, [f, scale, gamma](double r) { return scale * f(gamma * r); },
        p.support / gamma, 1.0 / gamma);
    k.gamma_ = gamma;
    k.profile_ = p;
    return k;
}

inline Kernel pwc_kac_kernel(int d, double gamma) { return kac_kernel(d, pwc_profile(), gamma); }

inline Kernel scaled(const Kernel& k, double c) {
    Kernel out = k;
    auto f = k.radial_;
    out.radial_ = [f, c](double r) { return c * f(r); };
    if (k.tail_) {
        auto t = k.tail_;
        out.tail_ = [t, c](long m) { return c * t(m); };
    }
    out.name_ = k.name_ + "*" + std::to_string(c);
    return out;
}

/// a + cb·b.
inline Kernel combine(const Kernel& a, const Kernel& b, double cb) {
    if (a.dim_ != b.dim_) throw InputError("kernels of different dimension");
    Kernel out;
    out.dim_ = a.dim_;
    out.name_ = a.name_ + (cb >= 0 ? "+" : "-") + b.name_;
    auto fa = a.radial_, fb = b.radial_;
    double ra = a.range_, rb = b.range_;
    out.radial_ = [fa, fb, cb, ra, rb](double r) {
        return (r <= ra + 1e-12 ? fa(r) : 0.0) + cb * (r <= rb + 1e-12 ? fb(r) : 0.0);
    };
    out.range_ = std::max(a.range_, b.range_);
    out.nominal_ = std::max(a.nominal_, b.nominal_);
    out.core_ = std::max(a.core_, b.core_);
    if (!out.finite_range()) {
        out.tail_ = [a, b, cb](long m) { return a.tail(m) + cb * b.tail(m); };
    }
    out.gamma_ = a.gamma_;
    out.profile_ = a.profile_;
    return out;
}

/// F = alt - base.
inline Kernel difference(const Kernel& alt, const Kernel& base) { return combine(alt, base, -1.0); }

/// J̃ = J on γ|x-y| <= 1-ε and 0 beyond.
inline Kernel truncated_kernel(const Kernel& base, double eps) {
    if (!base.gamma_) throw InputError("truncation needs a Kac kernel");
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0,1)");
    double cut = (1.0 - eps) / *base.gamma_;
    Kernel out = base;
    auto f = base.radial_;
    out.radial_ = [f, cut](double r) { return r <= cut + 1e-12 ? f(r) : 0.0; };
    out.range_ = std::min(base.range_, cut);
    out.name_ = base.name_ + "-trunc";
    return out;
}

/// F(x,y) = a/|x-y|^2 beyond (2γ)^{-1}, one-dimensional.
inline Kernel long_range_perturbation(double a, double gamma) {
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    double cut = 1.0 / (2.0 * gamma);
    long first = static_cast<long>(std::floor(cut + 1e-12)) + 1;
    Kernel k;
    k.dim_ = 1;
    k.name_ = "inverse-square";
    k.radial_ = [a, cut](double r) { return r > cut + 1e-12 ? a / (r * r) : 0.0; };
    k.tail_ = [a, first](long m) { return a * inverse_square_tail(std::max(m, first)); };
    k.range_ = std::numeric_limits<double>::infinity();
    k.nominal_ = std::numeric_limits<double>::infinity();
    k.core_ = cut;
    k.gamma_ = gamma;
    return k;
}

/// Piecewise-constant Kac kernel plus the inverse-square tail.
inline Kernel long_range_kernel(double a, double gamma) {
    return combine(pwc_kac_kernel(1, gamma), long_range_perturbation(a, gamma), 1.0);
}

} // namespace mrfuq::ising
