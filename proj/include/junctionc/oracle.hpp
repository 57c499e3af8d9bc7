#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "junction.hpp"
#include "potential.hpp"

// Reference implementations that proceed by definition: full configuration
// spaces, full enumerations. Used by tests and verification suites; every
// routine is size-bounded and rejects anything larger.

namespace junctionc::oracle {

struct JointTable {
    UniversePtr universe;
    std::vector<double> table;  // over all configurations of the universe
};

namespace detail {

// State of variable v in global configuration `index`, by plain digit
// arithmetic (deliberately not sharing the library's index helpers).
inline int state_of(const Universe& u, std::uint64_t index, VarId v) {
    std::uint64_t stride = 1;
    for (std::size_t w = u.size(); w-- > static_cast<std::size_t>(v) + 1;)
        stride *= static_cast<std::uint64_t>(u.cardinality(static_cast<VarId>(w)));
    return static_cast<int>((index / stride) % static_cast<std::uint64_t>(u.cardinality(v)));
}

inline std::uint64_t index_in_scope(const Universe& u, const VarSet& scope,
                                    std::uint64_t global_index) {
    std::uint64_t idx = 0;
    for (VarId v : scope)
        idx = idx * static_cast<std::uint64_t>(u.cardinality(v)) +
              static_cast<std::uint64_t>(state_of(u, global_index, v));
    return idx;
}

}  // namespace detail

// Pointwise product of all factors over the full configuration space.
inline JointTable joint_from_factors(const UniversePtr& u, const std::vector<Potential>& factors,
                                     std::uint64_t max_cells = std::uint64_t{1} << 20) {
    std::uint64_t total = u->table_size(u->all_vars());
    if (total > max_cells)
        throw BoundExceededError("joint_from_factors: " + std::to_string(total) +
                                 " configurations exceed the bound of " + std::to_string(max_cells));
    JointTable jt{u, std::vector<double>(total, 1.0)};
    for (const auto& f : factors)
        for (std::uint64_t i = 0; i < total; ++i)
            jt.table[i] *= f.table()[detail::index_in_scope(*u, f.scope(), i)];
    return jt;
}

// Exact marginal onto `vars` by direct summation.
inline Potential oracle_marginal(const JointTable& jt, const VarSet& vars) {
    std::vector<double> out(jt.universe->table_size(vars), 0.0);
    for (std::uint64_t i = 0; i < jt.table.size(); ++i)
        out[detail::index_in_scope(*jt.universe, vars, i)] += jt.table[i];
    return Potential(jt.universe, vars, std::move(out));
}

struct SpanningTreeRecord {
    std::vector<int> links;  // indices into the junction graph's link list
    std::uint64_t total_weight = 0;
    std::uint64_t total_cost = 0;
    bool junction_property = false;
};

namespace detail {

// Straight-line junction property check on an explicit adjacency list,
// kept separate from the tree builders it is used to judge.
inline bool junction_property_holds(const JunctionGraph& jg, const std::vector<int>& links) {
    const std::size_t k = jg.cliques.size();
    std::vector<std::vector<int>> adj(k);
    for (int li : links) {
        adj[jg.links[li].a].push_back(jg.links[li].b);
        adj[jg.links[li].b].push_back(jg.links[li].a);
    }
    for (std::size_t u = 0; u < k; ++u) {
        std::vector<int> parent(k, -2);
        parent[u] = -1;
        std::deque<int> queue{static_cast<int>(u)};
        while (!queue.empty()) {
            int cur = queue.front();
            queue.pop_front();
            for (int nb : adj[cur])
                if (parent[nb] == -2) {
                    parent[nb] = cur;
                    queue.push_back(nb);
                }
        }
        for (std::size_t v = u + 1; v < k; ++v) {
            VarSet inter = set_intersection(jg.cliques[u].vars, jg.cliques[v].vars);
            if (inter.empty()) continue;
            for (int cur = parent[v]; cur != -1 && cur != static_cast<int>(u); cur = parent[cur])
                if (!inter.subset_of(jg.cliques[cur].vars)) return false;
        }
    }
    return true;
}

inline void enumerate_trees_rec(const JunctionGraph& jg, std::size_t next, std::vector<int>& comp,
                                std::vector<int>& chosen, std::vector<SpanningTreeRecord>& out) {
    const std::size_t need = jg.cliques.size() - 1;
    if (chosen.size() == need) {
        SpanningTreeRecord rec;
        rec.links = chosen;
        for (int li : chosen) {
            rec.total_weight += static_cast<std::uint64_t>(jg.links[li].weight);
            rec.total_cost = checked_add(rec.total_cost, jg.links[li].cost);
        }
        rec.junction_property = junction_property_holds(jg, chosen);
        out.push_back(std::move(rec));
        return;
    }
    if (next >= jg.links.size()) return;
    if (jg.links.size() - next < need - chosen.size()) return;  // not enough links left

    auto root = [&](int x) {
        while (comp[x] != x) x = comp[x];
        return x;
    };
    int ra = root(jg.links[next].a), rb = root(jg.links[next].b);
    if (ra != rb) {
        auto saved = comp;
        comp[ra] = rb;
        chosen.push_back(static_cast<int>(next));
        enumerate_trees_rec(jg, next + 1, comp, chosen, out);
        chosen.pop_back();
        comp = saved;
    }
    enumerate_trees_rec(jg, next + 1, comp, chosen, out);
}

}  // namespace detail

// Every spanning tree of the junction graph, annotated with total weight,
// total cost and whether it satisfies the junction tree property.
inline std::vector<SpanningTreeRecord> enumerate_spanning_trees(const JunctionGraph& jg,
                                                                std::size_t max_cliques = 8) {
    if (jg.cliques.size() > max_cliques)
        throw BoundExceededError("enumerate_spanning_trees: " + std::to_string(jg.cliques.size()) +
                                 " cliques exceed the bound of " + std::to_string(max_cliques));
    std::vector<SpanningTreeRecord> out;
    if (jg.cliques.size() <= 1) {
        out.push_back(SpanningTreeRecord{{}, 0, 0, true});
        return out;
    }
    std::vector<int> comp(jg.cliques.size());
    std::iota(comp.begin(), comp.end(), 0);
    std::vector<int> chosen;
    detail::enumerate_trees_rec(jg, 0, comp, chosen, out);
    return out;
}

// Kirchhoff's theorem: number of spanning trees as a determinant. Used to
// keep enumeration corpora within their runtime budget.
inline double count_spanning_trees(const JunctionGraph& jg) {
    const std::size_t k = jg.cliques.size();
    if (k <= 1) return 1.0;
    std::vector<std::vector<double>> lap(k, std::vector<double>(k, 0.0));
    for (const auto& l : jg.links) {
        lap[l.a][l.a] += 1.0;
        lap[l.b][l.b] += 1.0;
        lap[l.a][l.b] -= 1.0;
        lap[l.b][l.a] -= 1.0;
    }
    // determinant of the (k-1)x(k-1) principal minor
    const std::size_t n = k - 1;
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(lap[r][col]) > std::fabs(lap[pivot][col])) pivot = r;
        if (std::fabs(lap[pivot][col]) < 1e-12) return 0.0;
        if (pivot != col) {
            std::swap(lap[pivot], lap[col]);
            det = -det;
        }
        det *= lap[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = lap[r][col] / lap[col][col];
            for (std::size_t c = col; c < n; ++c) lap[r][c] -= f * lap[col][c];
        }
    }
    return std::fabs(det);
}

struct EliminationRecord {
    std::vector<VarId> order;
    std::size_t fill_count = 0;
    std::uint64_t total_clique_weight = 0;
};

// One record per elimination order: fill-ins produced and the clique
// weight of the resulting triangulation. Self-contained simulation.
inline std::vector<EliminationRecord> enumerate_elimination_orders(const UndirectedGraph& g,
                                                                   std::size_t max_vars = 10) {
    const std::size_t n = g.num_vars();
    if (n > max_vars)
        throw BoundExceededError("enumerate_elimination_orders: " + std::to_string(n) +
                                 " variables exceed the bound of " + std::to_string(max_vars));
    std::vector<std::vector<char>> base(n, std::vector<char>(n, 0));
    for (auto [a, b] : g.edges()) base[a][b] = base[b][a] = 1;

    std::vector<VarId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<EliminationRecord> out;
    do {
        auto adj = base;
        std::vector<char> gone(n, 0);
        EliminationRecord rec;
        rec.order = perm;
        std::vector<VarSet> candidates;
        for (VarId v : perm) {
            std::vector<VarId> rest;
            for (std::size_t w = 0; w < n; ++w)
                if (adj[v][w] && !gone[w]) rest.push_back(static_cast<VarId>(w));
            for (std::size_t a = 0; a < rest.size(); ++a)
                for (std::size_t b = a + 1; b < rest.size(); ++b)
                    if (!adj[rest[a]][rest[b]]) {
                        adj[rest[a]][rest[b]] = adj[rest[b]][rest[a]] = 1;
                        ++rec.fill_count;
                    }
            rest.push_back(v);
            candidates.push_back(VarSet(std::move(rest)));
            gone[v] = 1;
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            bool nested = false;
            for (std::size_t j = 0; j < candidates.size() && !nested; ++j)
                if (i != j && (candidates[i].strict_subset_of(candidates[j]) ||
                               (candidates[i] == candidates[j] && j < i)))
                    nested = true;
            if (!nested)
                rec.total_clique_weight =
                    checked_add(rec.total_clique_weight, g.universe()->table_size(candidates[i]));
        }
        out.push_back(std::move(rec));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

inline std::size_t min_fill_over_orders(const std::vector<EliminationRecord>& records) {
    std::size_t best = records.front().fill_count;
    for (const auto& r : records) best = std::min(best, r.fill_count);
    return best;
}

inline std::uint64_t min_clique_weight_over_orders(const std::vector<EliminationRecord>& records) {
    std::uint64_t best = records.front().total_clique_weight;
    for (const auto& r : records) best = std::min(best, r.total_clique_weight);
    return best;
}

}  // namespace junctionc::oracle
