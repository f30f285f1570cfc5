#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "factor_model.hpp"
#include "logmath.hpp"

namespace mrfuq {

enum class PerturbationType { TypeI, TypeII, TypeIII };

inline const char* to_string(PerturbationType t) {
    switch (t) {
    case PerturbationType::TypeI: return "TypeI";
    case PerturbationType::TypeII: return "TypeII";
    default: return "TypeIII";
    }
}

// A new clique of the alternative together with the base cliques it contains.
struct AbsorbingClique {
    NodeSet clique;
    CliqueSet absorbed;
    friend bool operator==(const AbsorbingClique&, const AbsorbingClique&) = default;
};

struct PerturbationReport {
    PerturbationType ptype = PerturbationType::TypeIII;
    CliqueSet changed;                   // Type I: cliques whose (weight, table) differ
    std::vector<AbsorbingClique> unions;  // Type II: unions of >= 2 base cliques
    std::vector<AbsorbingClique> supersets;
    CliqueSet fresh;                      // Type II: contain no base clique
    CliqueSet changed_common;             // Type II: shared cliques with new potentials
    std::vector<std::pair<NodeId, NodeId>> added_edges;
    std::string reason;                   // Type III explanation
};

namespace detail {

inline bool strict_subset(const NodeSet& a, const NodeSet& b) {
    return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool same_potential(const Factor& a, const Factor& b) {
    return a.weight == b.weight && a.feature == b.feature;
}

} // namespace detail

inline PerturbationReport classify(const LogLinearModel& base, const LogLinearModel& alt) {
    PerturbationReport r;
    if (base.node_count() != alt.node_count()) {
        r.reason = "node sets differ";
        return r;
    }
    if (base.cardinalities() != alt.cardinalities()) {
        r.reason = "node cardinalities differ";
        return r;
    }
    auto eb = base.graph().edges();
    auto ea = alt.graph().edges();
    std::set<std::pair<NodeId, NodeId>> sa(ea.begin(), ea.end());
    for (auto e : eb)
        if (!sa.count(e)) {
            r.reason = "edge " + std::to_string(e.first) + "-" + std::to_string(e.second) +
                       " removed";
            return r;
        }
    if (eb.size() == ea.size()) {
        r.ptype = PerturbationType::TypeI;
        for (std::size_t i = 0; i < base.factors().size(); ++i)
            if (!detail::same_potential(base.factors()[i], alt.factors()[i]))
                r.changed.push_back(base.factors()[i].clique);
        return r;
    }
    r.ptype = PerturbationType::TypeII;
    std::set<std::pair<NodeId, NodeId>> sb(eb.begin(), eb.end());
    for (auto e : ea)
        if (!sb.count(e)) r.added_edges.push_back(e);
    for (const auto& fa : alt.factors()) {
        const Factor* fb = base.find_factor(fa.clique);
        if (fb) {
            if (!detail::same_potential(*fb, fa)) r.changed_common.push_back(fa.clique);
            continue;
        }
        AbsorbingClique ac{fa.clique, {}};
        std::set<NodeId> cover;
        for (const auto& f : base.factors())
            if (detail::strict_subset(f.clique, fa.clique)) {
                ac.absorbed.push_back(f.clique);
                cover.insert(f.clique.begin(), f.clique.end());
            }
        if (ac.absorbed.size() >= 2 && cover.size() == fa.clique.size())
            r.unions.push_back(std::move(ac));
        else if (!ac.absorbed.empty())
            r.supersets.push_back(std::move(ac));
        else
            r.fresh.push_back(fa.clique);
    }
    return r;
}

struct ExcessTerm {
    NodeSet clique;
    std::vector<double> log_table;  // same mixed-radix layout as feature tables
};

class ExcessFactor {
public:
    ExcessFactor() = default;
    explicit ExcessFactor(std::vector<std::size_t> card) : card_(std::move(card)) {}

    const std::vector<ExcessTerm>& terms() const { return terms_; }
    const std::vector<std::size_t>& cardinalities() const { return card_; }
    bool empty() const { return terms_.empty(); }

    void add(ExcessTerm t) {
        std::size_t n = 1;
        for (NodeId v : t.clique) n *= card_.at(v);
        if (t.log_table.size() != n) throw InputError("excess term table size mismatch");
        terms_.push_back(std::move(t));
    }

    /// log Φ at a full configuration.
    double evaluate(const Configuration& x) const {
        double s = 0.0;
        for (const auto& t : terms_) {
            std::size_t idx = 0;
            for (std::size_t i = t.clique.size(); i-- > 0;)
                idx = idx * card_[t.clique[i]] + x[t.clique[i]];
            s += t.log_table[idx];
        }
        return s;
    }

private:
    std::vector<std::size_t> card_;
    std::vector<ExcessTerm> terms_;
};

namespace detail {

// w·f of `f` lifted onto the (super)clique `onto`.
inline std::vector<double> lift(const LogLinearModel& m, const Factor& f, const NodeSet& onto) {
    std::vector<std::size_t> rad;
    for (NodeId v : onto) rad.push_back(m.cardinalities()[v]);
    StateSpace sp(rad);
    std::size_t n = sp.size();
    std::vector<double> out(n);
    Configuration x(m.node_count(), 0), z(onto.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < onto.size(); ++j) x[onto[j]] = z[j];
        out[i] = f.weight * f.feature[m.clique_index(f.clique, x)];
        sp.next(z);
    }
    return out;
}

} // namespace detail

/// Per-clique log excess terms: Σ log Ψ̃ = Σ log Ψ + Σ terms at every configuration.
inline ExcessFactor excess_factor(const LogLinearModel& base, const LogLinearModel& alt,
                                  const PerturbationReport& rep) {
    if (rep.ptype == PerturbationType::TypeIII)
        throw UnsupportedPerturbation("perturbation is neither parametric nor edge-adding: " +
                                      rep.reason);
    ExcessFactor ef(base.cardinalities());
    auto diff_term = [&](const NodeSet& c) {
        auto ta = detail::lift(alt, *alt.find_factor(c), c);
        auto tb = detail::lift(base, *base.find_factor(c), c);
        for (std::size_t i = 0; i < ta.size(); ++i) ta[i] -= tb[i];
        ef.add({c, std::move(ta)});
    };
    if (rep.ptype == PerturbationType::TypeI) {
        for (const auto& c : rep.changed) diff_term(c);
        return ef;
    }
    // each vanished base clique is subtracted once, on the first new clique holding it
    std::set<NodeSet> taken;
    std::vector<const AbsorbingClique*> owners;
    for (const auto& a : rep.unions) owners.push_back(&a);
    for (const auto& a : rep.supersets) owners.push_back(&a);
    std::sort(owners.begin(), owners.end(),
              [](const AbsorbingClique* x, const AbsorbingClique* y) { return x->clique < y->clique; });
    std::map<NodeSet, std::vector<double>> tables;
    for (const auto& f : alt.factors())
        if (!base.find_factor(f.clique)) tables[f.clique] = detail::lift(alt, f, f.clique);
    for (const auto* a : owners) {
        auto& t = tables.at(a->clique);
        for (const auto& c : a->absorbed) {
            if (!taken.insert(c).second) continue;
            auto tb = detail::lift(base, *base.find_factor(c), a->clique);
            for (std::size_t i = 0; i < t.size(); ++i) t[i] -= tb[i];
        }
    }
    for (auto& [c, t] : tables) ef.add({c, std::move(t)});
    for (const auto& c : rep.changed_common) diff_term(c);
    return ef;
}

inline ExcessFactor excess_factor(const LogLinearModel& base, const LogLinearModel& alt) {
    return excess_factor(base, alt, classify(base, alt));
}

/// log Φ at every state of the base's enumeration order.
inline std::vector<double> log_phi_vector(const LogLinearModel& base, const ExcessFactor& ef) {
    return observe(base.state_space(), [&](const Configuration& x) { return ef.evaluate(x); });
}

// Context is substituted into every term uniformly.
inline std::vector<double> log_phi_vector(const ReducedModel& base, const ExcessFactor& ef) {
    return observe(base.state_space(),
                   [&](const Configuration& z) { return ef.evaluate(base.full_configuration(z)); });
}

/// log E_q[Φ].
inline double log_mean_phi(const Measure& q, std::span<const double> log_phi) {
    LogSumExp acc;
    for (std::size_t i = 0; i < q.size(); ++i) acc.add(q.log_p[i] + log_phi[i]);
    return acc.value();
}

template <class Model>
double partition_ratio(const Model& base, const ExcessFactor& ef) {
    Measure q = enumerate(base);
    return std::exp(log_mean_phi(q, log_phi_vector(base, ef)));
}

template <class Model>
double likelihood_ratio(const Model& base, const ExcessFactor& ef, const Configuration& x) {
    base.check_configuration(x);
    Measure q = enumerate(base);
    double lz = log_mean_phi(q, log_phi_vector(base, ef));
    if constexpr (std::is_same_v<Model, ReducedModel>)
        return std::exp(ef.evaluate(base.full_configuration(x)) - lz);
    else
        return std::exp(ef.evaluate(x) - lz);
}

} // namespace mrfuq
