#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "logmath.hpp"

namespace mrfuq {

using Configuration = std::vector<std::size_t>;

/// Enumeration cap in states; MRFUQ_ENUM_CAP overrides the 2^24 default.
inline std::uint64_t enumeration_cap() {
    if (const char* s = std::getenv("MRFUQ_ENUM_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end != s && v > 0) return v;
    }
    return std::uint64_t{1} << 24;
}

// Mixed-radix state space, first variable least significant.
class StateSpace {
public:
    StateSpace() = default;
    explicit StateSpace(std::vector<std::size_t> radices) : radices_(std::move(radices)) {}

    const std::vector<std::size_t>& radices() const { return radices_; }
    std::size_t dims() const { return radices_.size(); }

    // Total number of states; throws CapacityError above `cap`.
    std::size_t size(std::uint64_t cap = enumeration_cap()) const {
        std::uint64_t n = 1;
        for (std::size_t r : radices_) {
            if (r == 0) throw InputError("zero cardinality");
            if (n > cap / r + 1) throw CapacityError(capacity_message(cap));
            n *= r;
        }
        if (n > cap) throw CapacityError(capacity_message(cap));
        return static_cast<std::size_t>(n);
    }

    Configuration decode(std::size_t idx) const {
        Configuration x(radices_.size());
        for (std::size_t i = 0; i < radices_.size(); ++i) {
            x[i] = idx % radices_[i];
            idx /= radices_[i];
        }
        return x;
    }

    std::size_t encode(const Configuration& x) const {
        if (x.size() != radices_.size())
            throw InputError("configuration has " + std::to_string(x.size()) +
                             " entries, expected " + std::to_string(radices_.size()));
        std::size_t idx = 0;
        for (std::size_t i = radices_.size(); i-- > 0;) {
            if (x[i] >= radices_[i])
                throw InputError("state " + std::to_string(x[i]) + " out of range at variable " +
                                 std::to_string(i));
            idx = idx * radices_[i] + x[i];
        }
        return idx;
    }

    // Advance x to the next state in index order; false after the last one.
    bool next(Configuration& x) const {
        for (std::size_t i = 0; i < radices_.size(); ++i) {
            if (++x[i] < radices_[i]) return true;
            x[i] = 0;
        }
        return false;
    }

private:
    std::string capacity_message(std::uint64_t cap) const {
        double bits = 0;
        for (std::size_t r : radices_) bits += std::log2(static_cast<double>(r));
        return "state space of 2^" + std::to_string(bits) + " states exceeds enumeration cap " +
               std::to_string(cap) + " (set MRFUQ_ENUM_CAP to at least that size)";
    }

    std::vector<std::size_t> radices_;
};

struct Factor {
    NodeSet clique;
    double weight = 0.0;
    std::vector<double> feature;  // mixed radix over clique, first node least significant

    friend bool operator==(const Factor&, const Factor&) = default;
};

class LogLinearModel {
public:
    LogLinearModel() = default;

    // Factors may come in any order; they must match the maximal cliques exactly.
    LogLinearModel(UndirectedGraph g, std::vector<std::size_t> cardinalities,
                   std::vector<Factor> factors)
        : graph_(std::move(g)), card_(std::move(cardinalities)) {
        if (card_.size() != graph_.node_count())
            throw InputError("cardinality list has " + std::to_string(card_.size()) +
                             " entries for " + std::to_string(graph_.node_count()) + " nodes");
        for (std::size_t c : card_)
            if (c < 2) throw InputError("node cardinality must be at least 2");
        CliqueSet cl = maximal_cliques(graph_);
        std::map<NodeSet, Factor> by;
        for (auto& f : factors) {
            std::sort(f.clique.begin(), f.clique.end());
            if (by.count(f.clique)) throw InputError("duplicate factor for clique " + str(f.clique));
            by.emplace(f.clique, std::move(f));
        }
        for (const auto& c : cl) {
            auto it = by.find(c);
            if (it == by.end()) throw InputError("missing factor for maximal clique " + str(c));
            if (it->second.feature.size() != table_size(c))
                throw InputError("feature table of clique " + str(c) + " has " +
                                 std::to_string(it->second.feature.size()) + " entries, expected " +
                                 std::to_string(table_size(c)));
            factors_.push_back(std::move(it->second));
            by.erase(it);
        }
        if (!by.empty())
            throw InputError("factor on " + str(by.begin()->first) + " is not a maximal clique");
    }

    /// Model with all weights and features zero (uniform distribution).
    static LogLinearModel uniform(UndirectedGraph g, std::vector<std::size_t> card) {
        std::vector<Factor> fs;
        for (auto& c : maximal_cliques(g)) {
            std::size_t n = 1;
            for (NodeId v : c) n *= card.at(v);
            fs.push_back({c, 0.0, std::vector<double>(n, 0.0)});
        }
        return LogLinearModel(std::move(g), std::move(card), std::move(fs));
    }

    const UndirectedGraph& graph() const { return graph_; }
    const std::vector<std::size_t>& cardinalities() const { return card_; }
    const std::vector<Factor>& factors() const { return factors_; }
    std::size_t node_count() const { return card_.size(); }
    StateSpace state_space() const { return StateSpace(card_); }

    const Factor* find_factor(const NodeSet& c) const {
        for (const auto& f : factors_)
            if (f.clique == c) return &f;
        return nullptr;
    }

    std::size_t table_size(const NodeSet& c) const {
        std::size_t n = 1;
        for (NodeId v : c) n *= card_.at(v);
        return n;
    }

    // Index into a clique table for a full configuration.
    std::size_t clique_index(const NodeSet& c, const Configuration& x) const {
        std::size_t idx = 0;
        for (std::size_t i = c.size(); i-- > 0;) idx = idx * card_[c[i]] + x[c[i]];
        return idx;
    }

    /// Σ_c w_c f_c(x_c).
    double log_potential(const Configuration& x) const {
        double s = 0.0;
        for (const auto& f : factors_) s += f.weight * f.feature[clique_index(f.clique, x)];
        return s;
    }

    void check_configuration(const Configuration& x) const { (void)state_space().encode(x); }

    friend bool operator==(const LogLinearModel&, const LogLinearModel&) = default;

private:
    static std::string str(const NodeSet& c) {
        std::string s = "{";
        for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
        return s + "}";
    }

    UndirectedGraph graph_;
    std::vector<std::size_t> card_;
    std::vector<Factor> factors_;
};

// A factor restricted to free variables after context substitution.
struct ReducedFactor {
    NodeSet base_clique;
    NodeSet free_clique;  // ids in the free graph
    std::vector<double> log_table;
};

class ReducedModel {
public:
    ReducedModel() = default;

    const LogLinearModel& base() const { return base_; }
    const NodeSet& context_nodes() const { return ctx_nodes_; }
    const std::vector<std::size_t>& context_values() const { return ctx_values_; }
    const UndirectedGraph& free_graph() const { return sub_.graph; }
    const std::vector<NodeId>& free_nodes() const { return sub_.new_to_old; }
    const std::vector<ReducedFactor>& factors() const { return factors_; }
    const std::vector<std::size_t>& cardinalities() const { return card_; }
    StateSpace state_space() const { return StateSpace(card_); }
    std::size_t node_count() const { return card_.size(); }

    double log_potential(const Configuration& z) const {
        double s = 0.0;
        for (const auto& f : factors_) {
            std::size_t idx = 0;
            for (std::size_t i = f.free_clique.size(); i-- > 0;)
                idx = idx * card_[f.free_clique[i]] + z[f.free_clique[i]];
            s += f.log_table[idx];
        }
        return s;
    }

    /// Free configuration merged with the context, in base node order.
    Configuration full_configuration(const Configuration& z) const {
        Configuration x(base_.node_count(), 0);
        for (std::size_t i = 0; i < z.size(); ++i) x[sub_.new_to_old[i]] = z[i];
        for (std::size_t i = 0; i < ctx_nodes_.size(); ++i) x[ctx_nodes_[i]] = ctx_values_[i];
        return x;
    }

    void check_configuration(const Configuration& z) const { (void)state_space().encode(z); }

    friend ReducedModel reduce(const LogLinearModel& m, NodeSet nodes,
                               std::vector<std::size_t> values);

private:
    LogLinearModel base_;
    NodeSet ctx_nodes_;
    std::vector<std::size_t> ctx_values_;
    InducedSubgraph sub_;
    std::vector<std::size_t> card_;
    std::vector<ReducedFactor> factors_;
};

/// Condition m on U=u over `nodes`; potentials get the context substituted.
inline ReducedModel reduce(const LogLinearModel& m, NodeSet nodes,
                           std::vector<std::size_t> values) {
    if (nodes.size() != values.size())
        throw InputError("context nodes and values differ in length");
    std::map<NodeId, std::size_t> ctx;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        m.graph().check_node(nodes[i]);
        if (values[i] >= m.cardinalities()[nodes[i]])
            throw InputError("context value out of range for node " + std::to_string(nodes[i]));
        if (!ctx.emplace(nodes[i], values[i]).second)
            throw InputError("repeated context node " + std::to_string(nodes[i]));
    }
    if (!nodes.empty() && ctx.size() == m.node_count())
        throw InputError("context covers every node");

    ReducedModel r;
    r.base_ = m;
    for (auto& [k, v] : ctx) {
        r.ctx_nodes_.push_back(k);
        r.ctx_values_.push_back(v);
    }
    NodeSet keep;
    for (NodeId v = 0; v < m.node_count(); ++v)
        if (!ctx.count(v)) keep.push_back(v);
    r.sub_ = induced_subgraph(m.graph(), keep);
    for (NodeId v : r.sub_.new_to_old) r.card_.push_back(m.cardinalities()[v]);

    for (const auto& f : m.factors()) {
        ReducedFactor rf;
        rf.base_clique = f.clique;
        NodeSet free_old;
        for (NodeId v : f.clique)
            if (!ctx.count(v)) {
                free_old.push_back(v);
                rf.free_clique.push_back(r.sub_.old_to_new.at(v));
            }
        std::vector<std::size_t> rad;
        for (NodeId v : free_old) rad.push_back(m.cardinalities()[v]);
        StateSpace sp(rad);
        std::size_t n = sp.size();
        rf.log_table.resize(n);
        Configuration x(m.node_count(), 0);
        for (auto& [k, v] : ctx) x[k] = v;
        Configuration zc(free_old.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < free_old.size(); ++j) x[free_old[j]] = zc[j];
            rf.log_table[i] = f.weight * f.feature[m.clique_index(f.clique, x)];
            sp.next(zc);
        }
        r.factors_.push_back(std::move(rf));
    }
    return r;
}

/// (cliques touching the context, cliques disjoint from it).
inline std::pair<CliqueSet, CliqueSet> clique_class_partition(const LogLinearModel& m,
                                                              const NodeSet& nodes) {
    std::set<NodeId> ctx;
    for (NodeId v : nodes) {
        m.graph().check_node(v);
        ctx.insert(v);
    }
    CliqueSet cu, c0;
    for (const auto& f : m.factors()) {
        bool touch = false;
        for (NodeId v : f.clique) touch = touch || ctx.count(v) > 0;
        (touch ? cu : c0).push_back(f.clique);
    }
    return {cu, c0};
}

// Exhaustively enumerated distribution; log_p is normalized.
struct Measure {
    StateSpace space;
    std::vector<double> log_p;
    double log_z = 0.0;

    std::size_t size() const { return log_p.size(); }

    static Measure from_log_weights(StateSpace sp, std::vector<double> lw) {
        Measure m;
        m.space = std::move(sp);
        m.log_z = log_sum_exp(lw);
        for (double& v : lw) v -= m.log_z;
        m.log_p = std::move(lw);
        return m;
    }
};

template <class Model>
Measure enumerate(const Model& m) {
    StateSpace sp = m.state_space();
    std::size_t n = sp.size();
    std::vector<double> lw(n);
    Configuration x(sp.dims(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        lw[i] = m.log_potential(x);
        sp.next(x);
    }
    return Measure::from_log_weights(std::move(sp), std::move(lw));
}

/// Evaluate f at every state in index order.
template <class F>
std::vector<double> observe(const StateSpace& sp, F&& f) {
    std::size_t n = sp.size(std::numeric_limits<std::uint64_t>::max());
    std::vector<double> out(n);
    Configuration x(sp.dims(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = f(static_cast<const Configuration&>(x));
        sp.next(x);
    }
    return out;
}

inline double expectation(const Measure& q, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += std::exp(q.log_p[i]) * f[i];
    return s;
}

template <class Model>
double log_partition(const Model& m) {
    return enumerate(m).log_z;
}

template <class Model>
double probability(const Model& m, const Configuration& x) {
    m.check_configuration(x);
    return std::exp(m.log_potential(x) - log_partition(m));
}

template <class Model>
double expectation(const Model& m, const std::function<double(const Configuration&)>& f) {
    Measure q = enumerate(m);
    return expectation(q, observe(q.space, f));
}

} // namespace mrfuq
