#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "kernel.hpp"

namespace mrfuq::ising {

using Coord = std::vector<long>;
using Spins = std::vector<int>;  // entries in {-1, +1}

/// Cube {0..L-1}^d; site index with coordinate 0 least significant.
struct Box {
    int d = 1;
    long L = 1;

    std::size_t size() const {
        std::size_t n = 1;
        for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(L);
        return n;
    }
    /// Number of unit faces on the surface, 2dL^{d-1}.
    double boundary_size() const { return 2.0 * d * std::pow(static_cast<double>(L), d - 1); }

    Coord coord(std::size_t i) const {
        Coord c(d);
        for (int k = 0; k < d; ++k) {
            c[k] = static_cast<long>(i % static_cast<std::size_t>(L));
            i /= static_cast<std::size_t>(L);
        }
        return c;
    }
    bool contains(const Coord& c) const {
        for (long v : c)
            if (v < 0 || v >= L) return false;
        return true;
    }
    std::size_t index(const Coord& c) const {
        std::size_t i = 0;
        for (int k = d; k-- > 0;) i = i * static_cast<std::size_t>(L) + static_cast<std::size_t>(c[k]);
        return i;
    }
};

enum class BoundaryKind { plus, minus, free, table };

struct Boundary {
    BoundaryKind kind = BoundaryKind::free;
    std::map<Coord, int> spins;  // used by `table`, sites outside the box within range

    static Boundary plus() { return {BoundaryKind::plus, {}}; }
    static Boundary minus() { return {BoundaryKind::minus, {}}; }
    static Boundary free() { return {BoundaryKind::free, {}}; }

    int at(const Coord& y) const {
        switch (kind) {
        case BoundaryKind::plus: return 1;
        case BoundaryKind::minus: return -1;
        case BoundaryKind::free: return 0;
        case BoundaryKind::table: {
            auto it = spins.find(y);
            if (it == spins.end()) throw InputError("boundary table misses a site within range");
            return it->second;
        }
        }
        return 0;
    }
};

inline const char* to_string(BoundaryKind k) {
    switch (k) {
    case BoundaryKind::plus: return "plus";
    case BoundaryKind::minus: return "minus";
    case BoundaryKind::free: return "free";
    case BoundaryKind::table: return "table";
    }
    return "?";
}

struct LatticeSystem {
    Box box;
    Boundary boundary;
    Kernel kernel;
    double beta = 1.0;
    double h = 0.0;

    void validate() const {
        if (box.L < 1) throw InputError("box side must be at least 1");
        if (box.d < 1) throw InputError("dimension must be positive");
        if (kernel.dim() != box.d) throw InputError("kernel and box dimension differ");
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("beta must be finite and >= 0");
        if (!std::isfinite(h)) throw InputError("field must be finite");
        if (!kernel.finite_range() && box.d != 1)
            throw InputError("infinite-range kernels are one-dimensional");
    }
};

struct Offset {
    Coord r;
    double value;
};

/// Nonzero kernel values on the cube of radius floor(range).
inline std::vector<Offset> kernel_offsets(const Kernel& k) {
    if (!k.finite_range()) throw InputError("kernel offsets need a finite range");
    long R = static_cast<long>(std::floor(k.range() + 1e-12));
    std::vector<Offset> out;
    Coord x(k.dim(), -R);
    for (;;) {
        double v = k(x);
        if (v != 0.0) out.push_back({x, v});
        int i = 0;
        while (i < k.dim() && ++x[i] > R) x[i++] = -R;
        if (i == k.dim()) break;
    }
    return out;
}

struct PairTerm {
    std::size_t i, j;  // i < j
    double J;
};

inline std::vector<PairTerm> in_box_pairs(const Box& box, const Kernel& k) {
    std::vector<PairTerm> out;
    std::size_t n = box.size();
    if (!k.finite_range()) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double v = k.at(static_cast<double>(j - i));
                if (v != 0.0) out.push_back({i, j, v});
            }
        return out;
    }
    auto offs = kernel_offsets(k);
    for (std::size_t i = 0; i < n; ++i) {
        Coord x = box.coord(i);
        for (const auto& o : offs) {
            Coord y = x;
            for (int t = 0; t < box.d; ++t) y[t] += o.r[t];
            if (!box.contains(y)) continue;
            std::size_t j = box.index(y);
            if (j > i) out.push_back({i, j, o.value});
        }
    }
    return out;
}

/// b_x = Sum_{y outside the box} K(x,y) σ̄(y).
inline std::vector<double> boundary_field(const Box& box, const Boundary& bc, const Kernel& k) {
    std::size_t n = box.size();
    std::vector<double> b(n, 0.0);
    if (bc.kind == BoundaryKind::free) return b;
    if (!k.finite_range()) {
        if (box.d != 1 || bc.kind == BoundaryKind::table)
            throw InputError("infinite-range boundary needs d=1 and a constant boundary");
        double s = bc.kind == BoundaryKind::plus ? 1.0 : -1.0;
        for (std::size_t x = 0; x < n; ++x)
            b[x] = s * (k.tail(static_cast<long>(x) + 1) + k.tail(box.L - static_cast<long>(x)));
        return b;
    }
    auto offs = kernel_offsets(k);
    for (std::size_t i = 0; i < n; ++i) {
        Coord x = box.coord(i);
        for (const auto& o : offs) {
            Coord y = x;
            for (int t = 0; t < box.d; ++t) y[t] += o.r[t];
            if (box.contains(y)) continue;
            b[i] += o.value * bc.at(y);
        }
    }
    return b;
}

/// Sites outside the box within kernel range, in lexicographic order.
inline std::vector<Coord> boundary_sites(const Box& box, const Kernel& k) {
    std::map<Coord, int> seen;
    auto offs = kernel_offsets(k);
    for (std::size_t i = 0; i < box.size(); ++i) {
        Coord x = box.coord(i);
        for (const auto& o : offs) {
            Coord y = x;
            for (int t = 0; t < box.d; ++t) y[t] += o.r[t];
            if (!box.contains(y)) seen.emplace(y, 0);
        }
    }
    std::vector<Coord> out;
    for (auto& [c, _] : seen) out.push_back(c);
    return out;
}

// H = -Sum_{pairs in box} J σσ - Sum_x σ_x (h + b_x), precomputed.
struct SpinHamiltonian {
    std::vector<PairTerm> pairs;
    std::vector<double> field;  // h + b_x

    double energy(const Spins& s) const {
        double e = 0.0;
        for (const auto& p : pairs) e -= p.J * s[p.i] * s[p.j];
        for (std::size_t x = 0; x < field.size(); ++x) e -= field[x] * s[x];
        return e;
    }
};

inline SpinHamiltonian spin_hamiltonian(const LatticeSystem& sys) {
    sys.validate();
    SpinHamiltonian H;
    H.pairs = in_box_pairs(sys.box, sys.kernel);
    H.field = boundary_field(sys.box, sys.boundary, sys.kernel);
    for (double& v : H.field) v += sys.h;
    return H;
}

/// H^{J,h}(σ_Δ | σ̄) for σ over the box.
inline double hamiltonian(const LatticeSystem& sys, const Spins& sigma) {
    if (sigma.size() != sys.box.size())
        throw InputError("configuration has " + std::to_string(sigma.size()) + " spins, box has " +
                         std::to_string(sys.box.size()));
    for (int v : sigma)
        if (v != 1 && v != -1) throw InputError("spins must be -1 or +1");
    return spin_hamiltonian(sys).energy(sigma);
}

/// State index bit i is site i; bit 0 means spin -1.
inline Spins spins_from_index(std::size_t idx, std::size_t n) {
    Spins s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = (idx >> i) & 1 ? 1 : -1;
    return s;
}

} // namespace mrfuq::ising
