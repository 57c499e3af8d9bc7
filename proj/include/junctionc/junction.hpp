#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "universe.hpp"

namespace junctionc {

struct Clique {
    int id = -1;
    VarSet vars;
    std::uint64_t table_size = 0;
};

struct Separator {
    VarSet vars;
    int weight = 0;  // |vars|
    std::uint64_t table_size = 0;
};

inline Separator make_separator(const Universe& u, VarSet vars) {
    Separator s;
    s.weight = static_cast<int>(vars.size());
    s.table_size = u.table_size(vars);
    s.vars = std::move(vars);
    return s;
}

struct JunctionLink {
    int a = -1, b = -1;  // clique ids, a < b
    Separator separator;
    int weight = 0;          // separator weight
    std::uint64_t cost = 0;  // table_size(a) + table_size(b)
};

struct JunctionGraph {
    UniversePtr universe;
    std::vector<Clique> cliques;
    std::vector<JunctionLink> links;  // sorted by (a, b)

    bool connected() const {
        if (cliques.empty()) return false;
        std::vector<int> comp(cliques.size());
        std::iota(comp.begin(), comp.end(), 0);
        // tiny union-find
        auto root = [&](int x) {
            while (comp[x] != x) x = comp[x] = comp[comp[x]];
            return x;
        };
        for (const auto& l : links) comp[root(l.a)] = root(l.b);
        int r = root(0);
        for (std::size_t i = 1; i < cliques.size(); ++i)
            if (root(static_cast<int>(i)) != r) return false;
        return true;
    }
};

// Cliques sorted by variable set; ids follow the sorted order.
inline std::vector<Clique> make_cliques(const UniversePtr& u, std::vector<VarSet> sets) {
    std::sort(sets.begin(), sets.end());
    std::vector<Clique> out;
    out.reserve(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
        Clique c;
        c.id = static_cast<int>(i);
        c.table_size = u->table_size(sets[i]);
        c.vars = std::move(sets[i]);
        out.push_back(std::move(c));
    }
    return out;
}

// One link per pair of cliques with nonempty intersection, labelled by the
// exact intersection. Link weight is the label size; link cost is the sum
// of the two clique table sizes.
inline JunctionGraph build_junction_graph(const UniversePtr& u, std::vector<Clique> cliques) {
    if (cliques.empty())
        throw SemanticError("build_junction_graph: empty clique collection");
    for (std::size_t i = 0; i < cliques.size(); ++i) {
        if (cliques[i].vars.empty())
            throw SemanticError("build_junction_graph: empty clique");
        if (cliques[i].id != static_cast<int>(i))
            throw SemanticError("build_junction_graph: clique ids must be dense and ordered");
    }
    for (std::size_t i = 0; i < cliques.size(); ++i)
        for (std::size_t j = 0; j < cliques.size(); ++j)
            if (i != j && cliques[i].vars.subset_of(cliques[j].vars))
                throw SemanticError("build_junction_graph: clique " +
                                    format_varset(*u, cliques[i].vars) + " is nested in " +
                                    format_varset(*u, cliques[j].vars));

    JunctionGraph jg;
    jg.universe = u;
    for (std::size_t i = 0; i < cliques.size(); ++i)
        for (std::size_t j = i + 1; j < cliques.size(); ++j) {
            VarSet inter = set_intersection(cliques[i].vars, cliques[j].vars);
            if (inter.empty()) continue;
            JunctionLink l;
            l.a = static_cast<int>(i);
            l.b = static_cast<int>(j);
            l.separator = make_separator(*u, std::move(inter));
            l.weight = l.separator.weight;
            l.cost = checked_add(cliques[i].table_size, cliques[j].table_size);
            jg.links.push_back(std::move(l));
        }
    jg.cliques = std::move(cliques);
    return jg;
}

struct JunctionTree {
    UniversePtr universe;
    std::vector<Clique> cliques;
    std::vector<JunctionLink> links;  // sorted by (a, b)
    std::uint64_t total_weight = 0;
    std::uint64_t total_cost = 0;

    // clique id -> (neighbour clique id, link index), neighbours ascending
    std::vector<std::vector<std::pair<int, int>>> adjacency;

    void finish() {
        total_weight = 0;
        total_cost = 0;
        std::sort(links.begin(), links.end(), [](const JunctionLink& x, const JunctionLink& y) {
            return std::pair(x.a, x.b) < std::pair(y.a, y.b);
        });
        adjacency.assign(cliques.size(), {});
        for (std::size_t i = 0; i < links.size(); ++i) {
            total_weight += static_cast<std::uint64_t>(links[i].weight);
            total_cost = checked_add(total_cost, links[i].cost);
            adjacency[links[i].a].emplace_back(links[i].b, static_cast<int>(i));
            adjacency[links[i].b].emplace_back(links[i].a, static_cast<int>(i));
        }
        for (auto& nb : adjacency) std::sort(nb.begin(), nb.end());
    }
};

namespace detail {

[[noreturn]] inline void throw_disconnected_junction_graph(const JunctionGraph& jg) {
    // components over clique ids
    std::vector<int> comp(jg.cliques.size());
    std::iota(comp.begin(), comp.end(), 0);
    auto root = [&](int x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
    };
    for (const auto& l : jg.links) comp[root(l.a)] = root(l.b);
    std::vector<std::vector<int>> groups(jg.cliques.size());
    for (std::size_t i = 0; i < jg.cliques.size(); ++i)
        groups[root(static_cast<int>(i))].push_back(static_cast<int>(i));
    std::vector<std::vector<int>> comps;
    for (auto& gp : groups)
        if (!gp.empty()) comps.push_back(std::move(gp));
    throw DisconnectedGraphError(
        "junction graph is disconnected (the source graph was not connected)", std::move(comps));
}

// Shared ordering: heavier separators first, then cheaper links, then the
// link's (a, b) position. Both tree builders use exactly this chain, which
// is what makes their outputs deterministic.
inline bool link_priority_before(const JunctionLink& x, const JunctionLink& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.cost != y.cost) return x.cost < y.cost;
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
}

}  // namespace detail

// Grows a tree from clique 0, always taking the heaviest frontier link
// (cost, then position, as tie-breaks).
inline JunctionTree prim_max_spanning_tree(const JunctionGraph& jg) {
    if (jg.cliques.empty())
        throw SemanticError("prim_max_spanning_tree: empty junction graph");
    std::vector<char> in_tree(jg.cliques.size(), 0);
    in_tree[0] = 1;
    JunctionTree t;
    t.universe = jg.universe;
    t.cliques = jg.cliques;
    for (std::size_t step = 1; step < jg.cliques.size(); ++step) {
        int best = -1;
        for (std::size_t i = 0; i < jg.links.size(); ++i) {
            const auto& l = jg.links[i];
            if (in_tree[l.a] == in_tree[l.b]) continue;  // frontier links only
            if (best < 0 || detail::link_priority_before(l, jg.links[best]))
                best = static_cast<int>(i);
        }
        if (best < 0) detail::throw_disconnected_junction_graph(jg);
        const auto& chosen = jg.links[best];
        in_tree[chosen.a] = in_tree[chosen.b] = 1;
        t.links.push_back(chosen);
    }
    t.finish();
    return t;
}

// Kruskal over links sorted by weight (descending) with cost as the
// secondary priority: the result is a maximal-weight spanning tree of
// minimal total cost among maximal-weight trees.
inline JunctionTree kruskal_min_cost_tree(const JunctionGraph& jg) {
    if (jg.cliques.empty())
        throw SemanticError("kruskal_min_cost_tree: empty junction graph");
    std::vector<int> idx(jg.links.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int x, int y) {
        return detail::link_priority_before(jg.links[x], jg.links[y]);
    });

    std::vector<int> comp(jg.cliques.size());
    std::iota(comp.begin(), comp.end(), 0);
    auto root = [&](int x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
    };

    JunctionTree t;
    t.universe = jg.universe;
    t.cliques = jg.cliques;
    for (int i : idx) {
        const auto& l = jg.links[i];
        int ra = root(l.a), rb = root(l.b);
        if (ra == rb) continue;
        comp[ra] = rb;
        t.links.push_back(l);
    }
    if (t.links.size() + 1 != jg.cliques.size())
        detail::throw_disconnected_junction_graph(jg);
    t.finish();
    return t;
}

// Assembles a tree value from a subset of junction-graph links (as chosen
// by a builder or an enumeration).
inline JunctionTree tree_from_links(const JunctionGraph& jg, const std::vector<int>& link_indices) {
    JunctionTree t;
    t.universe = jg.universe;
    t.cliques = jg.cliques;
    for (int li : link_indices) t.links.push_back(jg.links.at(static_cast<std::size_t>(li)));
    t.finish();
    return t;
}

struct JunctionPropertyVerdict {
    bool holds = false;
    int clique_u = -1, clique_v = -1;   // offending pair
    int offending_clique = -1;          // on the u-v path, missing part of the intersection
    explicit operator bool() const { return holds; }
};

// Checks that for every clique pair, all cliques on the connecting tree
// path contain the pair's intersection.
inline JunctionPropertyVerdict verify_junction_property(const JunctionTree& t) {
    const std::size_t k = t.cliques.size();
    for (std::size_t u = 0; u < k; ++u) {
        // BFS parents from u
        std::vector<int> parent(k, -2);
        parent[u] = -1;
        std::deque<int> queue{static_cast<int>(u)};
        while (!queue.empty()) {
            int cur = queue.front();
            queue.pop_front();
            for (auto [nb, li] : t.adjacency[cur])
                if (parent[nb] == -2) {
                    parent[nb] = cur;
                    queue.push_back(nb);
                }
        }
        for (std::size_t v = u + 1; v < k; ++v) {
            VarSet inter = set_intersection(t.cliques[u].vars, t.cliques[v].vars);
            if (inter.empty()) continue;
            for (int cur = parent[v]; cur != -1 && cur != static_cast<int>(u);
                 cur = parent[cur]) {
                if (!inter.subset_of(t.cliques[cur].vars))
                    return {false, static_cast<int>(u), static_cast<int>(v), cur};
            }
        }
    }
    return {true, -1, -1, -1};
}

// Link labels as a canonical multiset (sorted by variable set). Invariant
// across all junction trees of the same triangulated graph.
inline std::vector<Separator> separator_multiset(const JunctionTree& t) {
    std::vector<Separator> out;
    out.reserve(t.links.size());
    for (const auto& l : t.links) out.push_back(l.separator);
    std::sort(out.begin(), out.end(),
              [](const Separator& x, const Separator& y) { return x.vars < y.vars; });
    return out;
}

}  // namespace junctionc
