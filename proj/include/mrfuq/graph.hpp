#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mrfuq {

using NodeId = std::size_t;
using NodeSet = std::vector<NodeId>;  // kept sorted ascending
using CliqueSet = std::vector<NodeSet>;

class UndirectedGraph {
public:
    UndirectedGraph() = default;
    explicit UndirectedGraph(std::size_t n) : adj_(n) {}

    std::size_t node_count() const { return adj_.size(); }

    void add_edge(NodeId a, NodeId b) {
        check_node(a);
        check_node(b);
        if (a == b) throw InputError("self-loop on node " + std::to_string(a));
        adj_[a].insert(b);
        adj_[b].insert(a);
    }

    bool adjacent(NodeId a, NodeId b) const {
        return a < adj_.size() && adj_[a].count(b) > 0;
    }

    const std::set<NodeId>& neighbors(NodeId a) const { return adj_.at(a); }

    // Edges (i,j) with i<j, lexicographic.
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        for (NodeId i = 0; i < adj_.size(); ++i)
            for (NodeId j : adj_[i])
                if (i < j) out.emplace_back(i, j);
        return out;
    }

    std::size_t edge_count() const {
        std::size_t m = 0;
        for (const auto& s : adj_) m += s.size();
        return m / 2;
    }

    bool is_clique(const NodeSet& c) const {
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                if (!adjacent(c[i], c[j])) return false;
        return true;
    }

    void check_node(NodeId a) const {
        if (a >= adj_.size())
            throw InputError("unknown node id " + std::to_string(a));
    }

    friend bool operator==(const UndirectedGraph& a, const UndirectedGraph& b) {
        return a.adj_ == b.adj_;
    }

private:
    std::vector<std::set<NodeId>> adj_;
};

namespace detail {

inline void bron_kerbosch(const UndirectedGraph& g, NodeSet& r, std::set<NodeId> p,
                          std::set<NodeId> x, CliqueSet& out) {
    if (p.empty() && x.empty()) {
        NodeSet c = r;
        std::sort(c.begin(), c.end());
        out.push_back(std::move(c));
        return;
    }
    // pivot: vertex of P∪X with most neighbours in P
    NodeId pivot = 0;
    std::size_t best = 0;
    bool have = false;
    for (const auto* s : {&p, &x}) {
        for (NodeId u : *s) {
            std::size_t k = 0;
            for (NodeId v : g.neighbors(u)) k += p.count(v);
            if (!have || k > best) {
                pivot = u;
                best = k;
                have = true;
            }
        }
    }
    std::vector<NodeId> cand;
    for (NodeId v : p)
        if (!g.adjacent(pivot, v)) cand.push_back(v);
    for (NodeId v : cand) {
        std::set<NodeId> p2, x2;
        for (NodeId w : g.neighbors(v)) {
            if (p.count(w)) p2.insert(w);
            if (x.count(w)) x2.insert(w);
        }
        r.push_back(v);
        bron_kerbosch(g, r, std::move(p2), std::move(x2), out);
        r.pop_back();
        p.erase(v);
        x.insert(v);
    }
}

} // namespace detail

/// All maximal cliques, each ascending, list sorted lexicographically.
inline CliqueSet maximal_cliques(const UndirectedGraph& g) {
    CliqueSet out;
    if (g.node_count() == 0) return out;
    std::set<NodeId> p;
    for (NodeId i = 0; i < g.node_count(); ++i) p.insert(i);
    NodeSet r;
    detail::bron_kerbosch(g, r, std::move(p), {}, out);
    std::sort(out.begin(), out.end());
    return out;
}

struct InducedSubgraph {
    UndirectedGraph graph;
    std::vector<NodeId> new_to_old;
    std::map<NodeId, NodeId> old_to_new;
};

inline InducedSubgraph induced_subgraph(const UndirectedGraph& g, const NodeSet& keep) {
    InducedSubgraph res;
    std::set<NodeId> k(keep.begin(), keep.end());
    for (NodeId v : k) g.check_node(v);
    for (NodeId v : k) {
        res.old_to_new[v] = res.new_to_old.size();
        res.new_to_old.push_back(v);
    }
    res.graph = UndirectedGraph(res.new_to_old.size());
    for (auto [a, b] : g.edges())
        if (k.count(a) && k.count(b))
            res.graph.add_edge(res.old_to_new[a], res.old_to_new[b]);
    return res;
}

/// True iff removing c disconnects every path from a to b.
inline bool separates(const UndirectedGraph& g, const NodeSet& a, const NodeSet& b,
                      const NodeSet& c) {
    std::vector<int> tag(g.node_count(), 0);
    auto mark = [&](const NodeSet& s, int t) {
        for (NodeId v : s) {
            g.check_node(v);
            if (tag[v] != 0) throw InputError("separation sets must be disjoint");
            tag[v] = t;
        }
    };
    mark(a, 1);
    mark(b, 2);
    mark(c, 3);
    std::vector<bool> seen(g.node_count(), false);
    std::queue<NodeId> q;
    for (NodeId v : a) {
        seen[v] = true;
        q.push(v);
    }
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        if (tag[u] == 2) return false;
        for (NodeId w : g.neighbors(u)) {
            if (seen[w] || tag[w] == 3) continue;
            seen[w] = true;
            q.push(w);
        }
    }
    return true;
}

} // namespace mrfuq
