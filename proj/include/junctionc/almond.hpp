#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "junction.hpp"

namespace junctionc {

enum class AlmondNodeKind { clique, separator };

struct AlmondNode {
    AlmondNodeKind kind = AlmondNodeKind::clique;
    int id = -1;
    VarSet vars;
    std::uint64_t table_size = 0;
    int multiplicity = 0;  // separator nodes: number of junction-tree links with this label
};

struct AlmondLink {
    int subset = -1;         // separator node id
    int superset = -1;       // clique node or strictly larger separator node
    std::uint64_t cost = 0;  // table_size(subset) + table_size(superset)
};

// Tree whose nodes are the cliques plus one explicit node per distinct
// separator label. Every link joins a separator node to a strict superset.
struct AlmondTree {
    UniversePtr universe;
    std::vector<AlmondNode> nodes;  // cliques first (ids match clique ids)
    std::vector<AlmondLink> links;
    int num_cliques = 0;
    std::vector<std::vector<int>> adjacency;  // node id -> sorted neighbour ids

    int degree(int node) const { return static_cast<int>(adjacency[node].size()); }

    void finish() {
        std::sort(links.begin(), links.end(), [](const AlmondLink& x, const AlmondLink& y) {
            return std::pair(x.subset, x.superset) < std::pair(y.subset, y.superset);
        });
        adjacency.assign(nodes.size(), {});
        for (const auto& l : links) {
            adjacency[l.subset].push_back(l.superset);
            adjacency[l.superset].push_back(l.subset);
        }
        for (auto& nb : adjacency) std::sort(nb.begin(), nb.end());
    }
};

// Nodes holding each variable must induce a connected subtree, otherwise
// propagation over the tree cannot be exact.
inline bool has_running_intersection(const AlmondTree& a) {
    for (std::size_t v = 0; v < a.universe->size(); ++v) {
        std::vector<int> holders;
        for (const auto& n : a.nodes)
            if (n.vars.contains(static_cast<VarId>(v))) holders.push_back(n.id);
        if (holders.size() <= 1) continue;
        std::vector<char> in(a.nodes.size(), 0), seen(a.nodes.size(), 0);
        for (int h : holders) in[h] = 1;
        std::deque<int> queue{holders.front()};
        seen[holders.front()] = 1;
        std::size_t reached = 0;
        while (!queue.empty()) {
            int cur = queue.front();
            queue.pop_front();
            ++reached;
            for (int nb : a.adjacency[cur])
                if (in[nb] && !seen[nb]) {
                    seen[nb] = 1;
                    queue.push_back(nb);
                }
        }
        if (reached != holders.size()) return false;
    }
    return true;
}

namespace detail {

struct SeparatorGroup {
    VarSet vars;
    int multiplicity = 0;
};

// Distinct labels with multiplicities, ordered heaviest first (label order
// breaks ties) to match the construction order of the tree builders.
inline std::vector<SeparatorGroup> group_separators(const std::vector<Separator>& multiset) {
    std::map<VarSet, int> counts;
    for (const auto& s : multiset) {
        if (s.vars.empty()) throw SemanticError("separator labels must be nonempty");
        ++counts[s.vars];
    }
    std::vector<SeparatorGroup> groups;
    for (auto& [vars, count] : counts) groups.push_back({vars, count});
    std::sort(groups.begin(), groups.end(), [](const SeparatorGroup& x, const SeparatorGroup& y) {
        if (x.vars.size() != y.vars.size()) return x.vars.size() > y.vars.size();
        return x.vars < y.vars;
    });
    return groups;
}

struct LinkCandidate {
    int target = -1;
    std::uint64_t cost = 0;
    bool target_is_clique = false;
};

// Greedy selection shared by contract() and build_almond_tree(): process
// separator nodes heaviest first; for a node of multiplicity n take n+1
// acyclic links, cheapest first (a clique target wins cost ties).
inline void choose_links(AlmondTree& tree,
                         const std::vector<std::vector<LinkCandidate>>& candidates_per_sep) {
    std::vector<int> comp(tree.nodes.size());
    std::iota(comp.begin(), comp.end(), 0);
    auto root = [&](int x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
    };

    for (std::size_t si = 0; si < candidates_per_sep.size(); ++si) {
        const int sep_id = tree.num_cliques + static_cast<int>(si);
        auto candidates = candidates_per_sep[si];
        std::sort(candidates.begin(), candidates.end(),
                  [](const LinkCandidate& x, const LinkCandidate& y) {
                      if (x.cost != y.cost) return x.cost < y.cost;
                      if (x.target_is_clique != y.target_is_clique) return x.target_is_clique;
                      return x.target < y.target;
                  });
        int quota = tree.nodes[sep_id].multiplicity + 1;
        for (const auto& c : candidates) {
            if (quota == 0) break;
            int ra = root(sep_id), rb = root(c.target);
            if (ra == rb) continue;
            comp[ra] = rb;
            tree.links.push_back({sep_id, c.target, c.cost});
            --quota;
        }
        if (quota != 0)
            throw Error("almond construction: no acyclic superset link available for separator " +
                        format_varset(*tree.universe, tree.nodes[sep_id].vars) +
                        " (structural bug in the input)");
    }
}

inline void validate_almond(const AlmondTree& a) {
    if (a.links.size() + 1 != a.nodes.size())
        throw Error("almond construction produced a disconnected structure");
    for (const auto& l : a.links)
        if (!a.nodes[l.subset].vars.strict_subset_of(a.nodes[l.superset].vars))
            throw Error("almond construction produced a non-subset link");
    // n+1 superset links per separator node of multiplicity n
    for (const auto& n : a.nodes) {
        if (n.kind != AlmondNodeKind::separator) continue;
        int up = 0;
        for (const auto& l : a.links)
            if (l.subset == n.id) ++up;
        if (up != n.multiplicity + 1)
            throw Error("almond separator " + format_varset(*a.universe, n.vars) +
                        " has " + std::to_string(up) + " superset links, expected " +
                        std::to_string(n.multiplicity + 1));
    }
    if (!has_running_intersection(a))
        throw Error("almond construction violated the running intersection property");
}

}  // namespace detail

// Merges junction-tree links sharing an identical separator label into one
// separator node adjacent to the cliques those links touch. When the merge
// would close a cycle (possible when equal labels sit on disjoint parts of
// the tree), surplus links are thinned away heaviest-label-first.
inline AlmondTree contract(const JunctionTree& t) {
    AlmondTree a;
    a.universe = t.universe;
    a.num_cliques = static_cast<int>(t.cliques.size());
    for (const auto& c : t.cliques)
        a.nodes.push_back({AlmondNodeKind::clique, c.id, c.vars, c.table_size, 0});

    auto groups = detail::group_separators(separator_multiset(t));
    std::vector<std::vector<detail::LinkCandidate>> candidates(groups.size());
    for (std::size_t si = 0; si < groups.size(); ++si) {
        int id = a.num_cliques + static_cast<int>(si);
        a.nodes.push_back({AlmondNodeKind::separator, id, groups[si].vars,
                           t.universe->table_size(groups[si].vars), groups[si].multiplicity});
        std::vector<char> involved(t.cliques.size(), 0);
        for (const auto& l : t.links)
            if (l.separator.vars == groups[si].vars) involved[l.a] = involved[l.b] = 1;
        for (std::size_t c = 0; c < t.cliques.size(); ++c)
            if (involved[c])
                candidates[si].push_back(
                    {static_cast<int>(c),
                     checked_add(a.nodes[id].table_size, t.cliques[c].table_size), true});
    }
    detail::choose_links(a, candidates);
    a.finish();
    detail::validate_almond(a);
    return a;
}

// Minimal-cost Almond tree from the cliques and the (canonical) separator
// multiset: separators are processed by decreasing weight; each separator
// of multiplicity n receives n+1 acyclic links to strict supersets,
// cheapest first. A strictly larger separator node is a valid target; on
// a cost tie the clique target is preferred.
inline AlmondTree build_almond_tree(const UniversePtr& u,
                                    const std::vector<Clique>& cliques,
                                    const std::vector<Separator>& multiset) {
    AlmondTree a;
    a.universe = u;
    a.num_cliques = static_cast<int>(cliques.size());
    for (const auto& c : cliques)
        a.nodes.push_back({AlmondNodeKind::clique, c.id, c.vars, c.table_size, 0});

    auto groups = detail::group_separators(multiset);
    for (std::size_t si = 0; si < groups.size(); ++si) {
        int id = a.num_cliques + static_cast<int>(si);
        a.nodes.push_back({AlmondNodeKind::separator, id, groups[si].vars,
                           u->table_size(groups[si].vars), groups[si].multiplicity});
    }

    std::vector<std::vector<detail::LinkCandidate>> candidates(groups.size());
    for (std::size_t si = 0; si < groups.size(); ++si) {
        const auto& sep = a.nodes[a.num_cliques + static_cast<int>(si)];
        for (const auto& n : a.nodes) {
            if (n.id == sep.id) continue;
            if (!sep.vars.strict_subset_of(n.vars)) continue;
            candidates[si].push_back({n.id, checked_add(sep.table_size, n.table_size),
                                      n.kind == AlmondNodeKind::clique});
        }
    }
    detail::choose_links(a, candidates);
    a.finish();
    detail::validate_almond(a);
    return a;
}

// Operation counts for one full two-pass propagation. One marginalization
// unit per computed table projection; stored tables are the separator-held
// marginals the schedule needs to keep around.
struct MarginalizationBudget {
    std::size_t marginalizations = 0;
    std::size_t stored_separator_tables = 0;
    std::uint64_t projection_cells = 0;  // total cells of projection sources
};

// Junction tree: each directed pass over a link projects the source clique
// table down to the separator, and each separator keeps one table.
inline MarginalizationBudget marginalization_budget(const JunctionTree& t) {
    MarginalizationBudget b;
    b.marginalizations = 2 * t.links.size();
    b.stored_separator_tables = t.links.size();
    for (const auto& l : t.links)
        b.projection_cells = checked_add(b.projection_cells, l.cost);
    return b;
}

// Almond tree: only the superset-to-subset direction of a link projects
// (the opposite direction broadcasts a smaller table), so one projection
// per link; a separator node with n neighbours keeps n-1 tables.
inline MarginalizationBudget marginalization_budget(const AlmondTree& a) {
    MarginalizationBudget b;
    b.marginalizations = a.links.size();
    for (const auto& l : a.links)
        b.projection_cells = checked_add(b.projection_cells, a.nodes[l.superset].table_size);
    for (const auto& n : a.nodes)
        if (n.kind == AlmondNodeKind::separator)
            b.stored_separator_tables += static_cast<std::size_t>(a.degree(n.id) - 1);
    return b;
}

}  // namespace junctionc
