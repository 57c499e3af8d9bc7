#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "universe.hpp"

namespace junctionc {

// Undirected graph over the variables of a universe. Symmetric, irreflexive
// adjacency; immutable by convention once handed to the algorithms below.
class UndirectedGraph {
public:
    explicit UndirectedGraph(UniversePtr universe)
        : universe_(std::move(universe)),
          adj_(universe_->size(), std::vector<char>(universe_->size(), 0)) {}

    void add_edge(VarId a, VarId b) {
        check_var(a);
        check_var(b);
        if (a == b) throw SemanticError("self loops are not allowed");
        adj_[a][b] = adj_[b][a] = 1;
    }

    bool has_edge(VarId a, VarId b) const { return adj_[a][b] != 0; }

    std::size_t num_vars() const { return adj_.size(); }

    std::size_t num_edges() const {
        std::size_t n = 0;
        for (std::size_t a = 0; a < adj_.size(); ++a)
            for (std::size_t b = a + 1; b < adj_.size(); ++b) n += adj_[a][b] ? 1 : 0;
        return n;
    }

    std::vector<VarId> neighbors(VarId v) const {
        std::vector<VarId> out;
        for (std::size_t w = 0; w < adj_.size(); ++w)
            if (adj_[v][w]) out.push_back(static_cast<VarId>(w));
        return out;
    }

    // Edges with a < b, sorted.
    std::vector<std::pair<VarId, VarId>> edges() const {
        std::vector<std::pair<VarId, VarId>> out;
        for (std::size_t a = 0; a < adj_.size(); ++a)
            for (std::size_t b = a + 1; b < adj_.size(); ++b)
                if (adj_[a][b]) out.emplace_back(static_cast<VarId>(a), static_cast<VarId>(b));
        return out;
    }

    std::vector<std::vector<VarId>> connected_components() const {
        std::vector<std::vector<VarId>> comps;
        std::vector<char> seen(adj_.size(), 0);
        for (std::size_t s = 0; s < adj_.size(); ++s) {
            if (seen[s]) continue;
            std::vector<VarId> comp;
            std::deque<VarId> queue{static_cast<VarId>(s)};
            seen[s] = 1;
            while (!queue.empty()) {
                VarId v = queue.front();
                queue.pop_front();
                comp.push_back(v);
                for (std::size_t w = 0; w < adj_.size(); ++w)
                    if (adj_[v][w] && !seen[w]) {
                        seen[w] = 1;
                        queue.push_back(static_cast<VarId>(w));
                    }
            }
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
        return comps;
    }

    bool is_connected() const { return connected_components().size() == 1; }

    const UniversePtr& universe() const { return universe_; }

    friend bool operator==(const UndirectedGraph& a, const UndirectedGraph& b) {
        return a.adj_ == b.adj_;
    }

private:
    void check_var(VarId v) const {
        if (v < 0 || static_cast<std::size_t>(v) >= adj_.size())
            throw SemanticError("variable id out of range: " + std::to_string(v));
    }

    UniversePtr universe_;
    std::vector<std::vector<char>> adj_;
};

// Directed acyclic graph used as an input convenience; parent lists per node.
class Dag {
public:
    explicit Dag(UniversePtr universe)
        : universe_(std::move(universe)), parents_(universe_->size()) {}

    void add_edge(VarId parent, VarId child) {
        if (parent == child) throw SemanticError("self loops are not allowed");
        if (parent < 0 || child < 0 ||
            static_cast<std::size_t>(parent) >= parents_.size() ||
            static_cast<std::size_t>(child) >= parents_.size())
            throw SemanticError("variable id out of range in dag edge");
        auto& ps = parents_[child];
        if (std::find(ps.begin(), ps.end(), parent) == ps.end()) ps.push_back(parent);
    }

    const std::vector<VarId>& parents(VarId child) const {
        return parents_[static_cast<std::size_t>(child)];
    }

    std::size_t num_vars() const { return parents_.size(); }
    const UniversePtr& universe() const { return universe_; }

    // Kahn's algorithm; nullopt when a directed cycle exists.
    std::optional<std::vector<VarId>> topological_order() const {
        std::vector<int> indeg(parents_.size(), 0);
        for (std::size_t c = 0; c < parents_.size(); ++c)
            indeg[c] = static_cast<int>(parents_[c].size());
        std::vector<VarId> order;
        std::deque<VarId> ready;
        for (std::size_t v = 0; v < parents_.size(); ++v)
            if (indeg[v] == 0) ready.push_back(static_cast<VarId>(v));
        while (!ready.empty()) {
            VarId v = ready.front();
            ready.pop_front();
            order.push_back(v);
            for (std::size_t c = 0; c < parents_.size(); ++c)
                for (VarId p : parents_[c])
                    if (p == v && --indeg[c] == 0) ready.push_back(static_cast<VarId>(c));
        }
        if (order.size() != parents_.size()) return std::nullopt;
        return order;
    }

private:
    UniversePtr universe_;
    std::vector<std::vector<VarId>> parents_;
};

// Drops directions and marries co-parents.
inline UndirectedGraph moralize(const Dag& dag) {
    if (!dag.topological_order())
        throw CycleError("cannot moralize: dag contains a directed cycle");
    UndirectedGraph g(dag.universe());
    for (std::size_t c = 0; c < dag.num_vars(); ++c) {
        const auto& ps = dag.parents(static_cast<VarId>(c));
        for (VarId p : ps) g.add_edge(p, static_cast<VarId>(c));
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j) g.add_edge(ps[i], ps[j]);
    }
    return g;
}

struct ChordalityVerdict {
    bool chordal = false;
    std::vector<VarId> witness_cycle;  // chordless cycle of length >= 4 when !chordal
    explicit operator bool() const { return chordal; }
};

// Maximum cardinality search visit order (ties to the lowest id).
inline std::vector<VarId> mcs_order(const UndirectedGraph& g) {
    const std::size_t n = g.num_vars();
    std::vector<int> weight(n, 0);
    std::vector<char> visited(n, 0);
    std::vector<VarId> order;
    order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        int best = -1;
        for (std::size_t v = 0; v < n; ++v)
            if (!visited[v] && (best < 0 || weight[v] > weight[best])) best = static_cast<int>(v);
        visited[best] = 1;
        order.push_back(best);
        for (VarId w : g.neighbors(best))
            if (!visited[w]) ++weight[w];
    }
    return order;
}

namespace detail {

// Chordless cycle through x, v, y where x and y are non-adjacent neighbours
// of v: v plus a shortest x-y path avoiding v and v's other neighbours.
inline std::optional<std::vector<VarId>> chordless_cycle_through(
    const UndirectedGraph& g, VarId v, VarId x, VarId y) {
    const std::size_t n = g.num_vars();
    std::vector<char> allowed(n, 1);
    allowed[v] = 0;
    for (VarId w : g.neighbors(v))
        if (w != x && w != y) allowed[w] = 0;
    std::vector<int> parent(n, -2);
    std::deque<VarId> queue{x};
    parent[x] = -1;
    while (!queue.empty()) {
        VarId cur = queue.front();
        queue.pop_front();
        if (cur == y) break;
        for (VarId w : g.neighbors(cur))
            if (allowed[w] && parent[w] == -2) {
                parent[w] = cur;
                queue.push_back(w);
            }
    }
    if (parent[y] == -2) return std::nullopt;
    std::vector<VarId> path;
    for (VarId cur = y; cur != -1; cur = parent[cur]) path.push_back(cur);
    std::reverse(path.begin(), path.end());  // x .. y
    std::vector<VarId> cycle{v};
    cycle.insert(cycle.end(), path.begin(), path.end());
    return cycle;
}

}  // namespace detail

// True iff every cycle of length > 3 has a chord. On failure the verdict
// carries a concrete chordless cycle, found by scanning all (v, x, y) with
// x, y non-adjacent neighbours of v; any chordless cycle yields such a
// triple, so the scan cannot miss.
inline ChordalityVerdict is_chordal(const UndirectedGraph& g) {
    const std::size_t n = g.num_vars();
    auto order = mcs_order(g);

    // Reverse MCS order is a perfect elimination order iff the graph is
    // chordal: each eliminated vertex must have a complete remaining
    // neighbourhood.
    std::vector<char> eliminated(n, 0);
    bool ok = true;
    for (std::size_t i = order.size(); i-- > 0 && ok;) {
        VarId v = order[i];
        std::vector<VarId> rest;
        for (VarId w : g.neighbors(v))
            if (!eliminated[w]) rest.push_back(w);
        for (std::size_t a = 0; a < rest.size() && ok; ++a)
            for (std::size_t b = a + 1; b < rest.size() && ok; ++b)
                if (!g.has_edge(rest[a], rest[b])) ok = false;
        eliminated[v] = 1;
    }
    if (ok) return {true, {}};

    for (std::size_t v = 0; v < n; ++v) {
        auto nbrs = g.neighbors(static_cast<VarId>(v));
        for (std::size_t a = 0; a < nbrs.size(); ++a)
            for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
                if (g.has_edge(nbrs[a], nbrs[b])) continue;
                auto cycle = detail::chordless_cycle_through(g, static_cast<VarId>(v),
                                                             nbrs[a], nbrs[b]);
                if (cycle) return {false, std::move(*cycle)};
            }
    }
    return {false, {}};  // unreachable for non-chordal graphs
}

struct EliminationOrder {
    std::vector<VarId> sequence;  // a permutation of 0..n-1
};

struct TriangulationResult {
    UndirectedGraph graph;                            // chordal supergraph
    std::vector<std::pair<VarId, VarId>> fill_ins;    // added edges, a < b, sorted
    EliminationOrder order;
    std::uint64_t total_clique_weight = 0;            // sum of clique table sizes
};

enum class TriangulationObjective { fill_count, clique_weight };

namespace detail {

inline void require_permutation(const UndirectedGraph& g, const EliminationOrder& order) {
    std::vector<char> seen(g.num_vars(), 0);
    if (order.sequence.size() != g.num_vars())
        throw SemanticError("elimination order must mention every variable exactly once");
    for (VarId v : order.sequence) {
        if (v < 0 || static_cast<std::size_t>(v) >= g.num_vars() || seen[v])
            throw SemanticError("elimination order is not a permutation");
        seen[v] = 1;
    }
}

// Candidate cliques from elimination: {v} + remaining neighbours at the
// time v is eliminated. Keeping only the non-nested ones yields exactly
// the maximal cliques of the filled graph.
inline std::vector<VarSet> maximal_only(std::vector<VarSet> candidates) {
    std::vector<VarSet> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        bool nested = false;
        for (std::size_t j = 0; j < candidates.size() && !nested; ++j)
            if (i != j && (candidates[i].strict_subset_of(candidates[j]) ||
                           (candidates[i] == candidates[j] && j < i)))
                nested = true;
        if (!nested) out.push_back(candidates[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// Simulates elimination in `order`, adding fill-ins as it goes.
inline TriangulationResult eliminate_with_order(const UndirectedGraph& g,
                                                const EliminationOrder& order) {
    detail::require_permutation(g, order);
    const std::size_t n = g.num_vars();
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (auto [a, b] : g.edges()) adj[a][b] = adj[b][a] = 1;

    std::vector<char> eliminated(n, 0);
    std::vector<std::pair<VarId, VarId>> fills;
    std::vector<VarSet> candidates;
    for (VarId v : order.sequence) {
        std::vector<VarId> rest;
        for (std::size_t w = 0; w < n; ++w)
            if (adj[v][w] && !eliminated[w]) rest.push_back(static_cast<VarId>(w));
        for (std::size_t a = 0; a < rest.size(); ++a)
            for (std::size_t b = a + 1; b < rest.size(); ++b)
                if (!adj[rest[a]][rest[b]]) {
                    adj[rest[a]][rest[b]] = adj[rest[b]][rest[a]] = 1;
                    fills.emplace_back(std::min(rest[a], rest[b]), std::max(rest[a], rest[b]));
                }
        rest.push_back(v);
        candidates.push_back(VarSet(std::move(rest)));
        eliminated[v] = 1;
    }
    std::sort(fills.begin(), fills.end());

    UndirectedGraph filled = g;
    for (auto [a, b] : fills) filled.add_edge(a, b);

    std::uint64_t weight = 0;
    for (const auto& c : detail::maximal_only(candidates))
        weight = checked_add(weight, g.universe()->table_size(c));

    return TriangulationResult{std::move(filled), std::move(fills), order, weight};
}

namespace detail {

inline void require_connected(const UndirectedGraph& g, const char* op) {
    if (g.num_vars() == 0) throw SemanticError(std::string(op) + ": graph has no variables");
    auto comps = g.connected_components();
    if (comps.size() > 1) {
        std::string msg = std::string(op) + ": graph is disconnected (" +
                          std::to_string(comps.size()) + " components:";
        for (const auto& c : comps) {
            msg += " {";
            for (std::size_t i = 0; i < c.size(); ++i)
                msg += (i ? "," : "") + g.universe()->name(c[i]);
            msg += "}";
        }
        msg += "); compile components separately";
        std::vector<std::vector<int>> raw(comps.begin(), comps.end());
        throw DisconnectedGraphError(msg, std::move(raw));
    }
}

}  // namespace detail

// One-step look-ahead elimination: pick the variable needing the fewest
// fill-ins, break ties by the state-space size of the clique it would
// form, then by the lowest id.
inline TriangulationResult triangulate_heuristic(const UndirectedGraph& g) {
    detail::require_connected(g, "triangulate_heuristic");
    const std::size_t n = g.num_vars();
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (auto [a, b] : g.edges()) adj[a][b] = adj[b][a] = 1;

    std::vector<char> eliminated(n, 0);
    EliminationOrder order;
    for (std::size_t step = 0; step < n; ++step) {
        int best = -1;
        std::size_t best_fill = 0;
        std::uint64_t best_weight = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (eliminated[v]) continue;
            std::vector<VarId> rest{static_cast<VarId>(v)};
            for (std::size_t w = 0; w < n; ++w)
                if (adj[v][w] && !eliminated[w]) rest.push_back(static_cast<VarId>(w));
            std::size_t fill = 0;
            for (std::size_t a = 1; a < rest.size(); ++a)
                for (std::size_t b = a + 1; b < rest.size(); ++b)
                    if (!adj[rest[a]][rest[b]]) ++fill;
            std::uint64_t weight = g.universe()->table_size(VarSet(rest));
            if (best < 0 || fill < best_fill ||
                (fill == best_fill && weight < best_weight)) {
                best = static_cast<int>(v);
                best_fill = fill;
                best_weight = weight;
            }
        }
        std::vector<VarId> rest;
        for (std::size_t w = 0; w < n; ++w)
            if (adj[best][w] && !eliminated[w]) rest.push_back(static_cast<VarId>(w));
        for (std::size_t a = 0; a < rest.size(); ++a)
            for (std::size_t b = a + 1; b < rest.size(); ++b)
                adj[rest[a]][rest[b]] = adj[rest[b]][rest[a]] = 1;
        eliminated[best] = 1;
        order.sequence.push_back(best);
    }
    return eliminate_with_order(g, order);
}

// Exhaustive minimum over all elimination orders; ties resolved by the
// lexicographically smallest order. Exponential, so hard-bounded.
inline TriangulationResult triangulate_optimal(const UndirectedGraph& g,
                                               TriangulationObjective objective,
                                               std::size_t max_vars = 10) {
    detail::require_connected(g, "triangulate_optimal");
    if (g.num_vars() > max_vars)
        throw BoundExceededError("triangulate_optimal: " + std::to_string(g.num_vars()) +
                                 " variables exceed the bound of " + std::to_string(max_vars) +
                                 "; use triangulate_heuristic");

    const std::size_t n = g.num_vars();
    std::vector<std::vector<char>> base(n, std::vector<char>(n, 0));
    for (auto [a, b] : g.edges()) base[a][b] = base[b][a] = 1;

    std::vector<VarId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<VarId> best_order;
    std::uint64_t best_score = 0;
    std::vector<std::vector<char>> adj;
    std::vector<char> eliminated;
    do {
        adj = base;
        eliminated.assign(n, 0);
        std::uint64_t fills = 0;
        std::vector<VarSet> candidates;
        for (VarId v : perm) {
            std::vector<VarId> rest;
            for (std::size_t w = 0; w < n; ++w)
                if (adj[v][w] && !eliminated[w]) rest.push_back(static_cast<VarId>(w));
            for (std::size_t a = 0; a < rest.size(); ++a)
                for (std::size_t b = a + 1; b < rest.size(); ++b)
                    if (!adj[rest[a]][rest[b]]) {
                        adj[rest[a]][rest[b]] = adj[rest[b]][rest[a]] = 1;
                        ++fills;
                    }
            if (objective == TriangulationObjective::clique_weight) {
                rest.push_back(v);
                candidates.push_back(VarSet(std::move(rest)));
            }
            eliminated[v] = 1;
        }
        std::uint64_t score = fills;
        if (objective == TriangulationObjective::clique_weight) {
            score = 0;
            for (const auto& c : detail::maximal_only(candidates))
                score = checked_add(score, g.universe()->table_size(c));
        }
        if (best_order.empty() || score < best_score) {
            best_score = score;
            best_order = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    return eliminate_with_order(g, EliminationOrder{std::move(best_order)});
}

// Maximal cliques of a chordal graph via elimination along a perfect order
// (reverse MCS) with nested candidates filtered out. Results are sorted.
inline std::vector<VarSet> cliques(const UndirectedGraph& g) {
    auto verdict = is_chordal(g);
    if (!verdict) {
        std::string msg = "cliques: graph is not chordal; chordless cycle:";
        for (VarId v : verdict.witness_cycle) msg += ' ' + g.universe()->name(v);
        throw NotChordalError(msg, verdict.witness_cycle);
    }
    auto order = mcs_order(g);
    std::reverse(order.begin(), order.end());
    std::vector<char> eliminated(g.num_vars(), 0);
    std::vector<VarSet> candidates;
    for (VarId v : order) {
        std::vector<VarId> member{v};
        for (VarId w : g.neighbors(v))
            if (!eliminated[w]) member.push_back(w);
        candidates.push_back(VarSet(std::move(member)));
        eliminated[v] = 1;
    }
    return detail::maximal_only(std::move(candidates));
}

}  // namespace junctionc
