#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "test_support.hpp"

namespace {

jt::JunctionGraph junction_graph_of(const jt::UniversePtr& u, std::vector<jt::VarSet> sets) {
    return jt::build_junction_graph(u, jt::make_cliques(u, std::move(sets)));
}

const jt::AlmondNode* separator_node(const jt::AlmondTree& a, const jt::VarSet& vars) {
    for (const auto& n : a.nodes)
        if (n.kind == jt::AlmondNodeKind::separator && n.vars == vars) return &n;
    return nullptr;
}

// Test-side reference: the cheapest valid tree over the same nodes, found
// by trying every way of giving each separator its multiplicity+1 superset
// links. Returns nothing when no combination forms a valid tree.
struct AlmondEnumeration {
    std::size_t valid_trees = 0;
    std::uint64_t min_cost = 0;
};

std::optional<AlmondEnumeration> enumerate_almond_trees(const jt::UniversePtr& u,
                                                        const std::vector<jt::Clique>& cliques,
                                                        const std::vector<jt::Separator>& multiset,
                                                        std::size_t combo_budget = 2'000'000) {
    // same node layout as the builder: cliques, then labels heaviest first
    std::map<jt::VarSet, int> counts;
    for (const auto& s : multiset) ++counts[s.vars];
    std::vector<std::pair<jt::VarSet, int>> groups(counts.begin(), counts.end());
    std::sort(groups.begin(), groups.end(), [](const auto& x, const auto& y) {
        if (x.first.size() != y.first.size()) return x.first.size() > y.first.size();
        return x.first < y.first;
    });

    jt::AlmondTree proto;
    proto.universe = u;
    proto.num_cliques = static_cast<int>(cliques.size());
    for (const auto& c : cliques)
        proto.nodes.push_back({jt::AlmondNodeKind::clique, c.id, c.vars, c.table_size, 0});
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        int id = proto.num_cliques + static_cast<int>(gi);
        proto.nodes.push_back({jt::AlmondNodeKind::separator, id, groups[gi].first,
                               u->table_size(groups[gi].first), groups[gi].second});
    }

    std::vector<std::vector<int>> candidates(groups.size());
    std::size_t combos = 1;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& sep = proto.nodes[proto.num_cliques + gi];
        for (const auto& n : proto.nodes)
            if (n.id != sep.id && sep.vars.strict_subset_of(n.vars))
                candidates[gi].push_back(n.id);
        std::size_t quota = static_cast<std::size_t>(groups[gi].second) + 1;
        if (candidates[gi].size() < quota) return std::nullopt;
        // loose upper bound on the combination count
        std::size_t c = 1;
        for (std::size_t i = 0; i < quota; ++i) c *= candidates[gi].size() - i;
        if (combos > combo_budget / std::max<std::size_t>(c, 1)) return std::nullopt;
        combos *= c;
    }

    AlmondEnumeration out;
    std::vector<jt::AlmondLink> links;
    auto link_cost = [&](int sep_id, int target) {
        return proto.nodes[sep_id].table_size + proto.nodes[target].table_size;
    };
    std::function<void(std::size_t)> per_separator = [&](std::size_t gi) {
        if (gi == groups.size()) {
            jt::AlmondTree t = proto;
            t.links = links;
            t.finish();
            // tree check: right link count plus connectivity
            if (t.links.size() + 1 != t.nodes.size()) return;
            std::vector<int> comp(t.nodes.size());
            std::iota(comp.begin(), comp.end(), 0);
            auto root = [&](int x) {
                while (comp[x] != x) x = comp[x] = comp[comp[x]];
                return x;
            };
            for (const auto& l : t.links) {
                int ra = root(l.subset), rb = root(l.superset);
                if (ra == rb) return;  // cycle
                comp[ra] = rb;
            }
            if (!jt::has_running_intersection(t)) return;
            std::uint64_t cost = 0;
            for (const auto& l : t.links) cost += l.cost;
            if (out.valid_trees == 0 || cost < out.min_cost) out.min_cost = cost;
            ++out.valid_trees;
            return;
        }
        const int sep_id = proto.num_cliques + static_cast<int>(gi);
        const std::size_t quota = static_cast<std::size_t>(groups[gi].second) + 1;
        std::vector<std::size_t> pick(quota);
        std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t from,
                                                                   std::size_t depth) {
            if (depth == quota) {
                for (std::size_t i = 0; i < quota; ++i)
                    links.push_back({sep_id, candidates[gi][pick[i]],
                                     link_cost(sep_id, candidates[gi][pick[i]])});
                per_separator(gi + 1);
                links.resize(links.size() - quota);
                return;
            }
            for (std::size_t c = from; c < candidates[gi].size(); ++c) {
                pick[depth] = c;
                choose(c + 1, depth + 1);
            }
        };
        choose(0, 0);
    };
    per_separator(0);
    if (out.valid_trees == 0) return std::nullopt;
    return out;
}

}  // namespace

TEST_CASE("contract merges equal separators into one node") {
    // star: central clique {A,B} with {A,C}, {A,D}, {A,E}; all links {A}
    auto u = letters(5);
    auto jg = junction_graph_of(
        u, {jt::VarSet{0, 1}, jt::VarSet{0, 2}, jt::VarSet{0, 3}, jt::VarSet{0, 4}});
    auto t = jt::kruskal_min_cost_tree(jg);
    REQUIRE(t.links.size() == 3);
    auto a = jt::contract(t);
    REQUIRE(a.nodes.size() == 5);  // 4 cliques + one {A} node
    const auto* sep = separator_node(a, jt::VarSet{0});
    REQUIRE(sep != nullptr);
    CHECK(sep->multiplicity == 3);
    CHECK(a.degree(sep->id) == 4);
    CHECK(a.links.size() == 4);
}

TEST_CASE("contract on distinct separators only inserts degree-2 nodes") {
    auto u = letters(5);
    auto jg = junction_graph_of(u, {jt::VarSet{0, 1, 2}, jt::VarSet{1, 2, 3}, jt::VarSet{2, 3, 4}});
    auto a = jt::contract(jt::kruskal_min_cost_tree(jg));
    REQUIRE(a.nodes.size() == 5);  // 3 cliques + {B,C} + {C,D}
    for (const auto& n : a.nodes)
        if (n.kind == jt::AlmondNodeKind::separator) {
            CHECK(n.multiplicity == 1);
            CHECK(a.degree(n.id) == 2);
        }
    CHECK(separator_node(a, jt::VarSet{2}) == nullptr);  // no {C} node

    auto single = junction_graph_of(letters(2), {jt::VarSet{0, 1}});
    auto a1 = jt::contract(jt::kruskal_min_cost_tree(single));
    CHECK(a1.nodes.size() == 1);
    CHECK(a1.links.empty());
}

TEST_CASE("build: a multiplicity-2 separator links to all three cliques") {
    auto u = letters(4);  // A B C D
    auto cl = jt::make_cliques(u, {jt::VarSet{0, 1}, jt::VarSet{0, 2}, jt::VarSet{0, 3}});
    std::vector<jt::Separator> multiset{jt::make_separator(*u, jt::VarSet{0}),
                                        jt::make_separator(*u, jt::VarSet{0})};
    auto a = jt::build_almond_tree(u, cl, multiset);
    const auto* sep = separator_node(a, jt::VarSet{0});
    REQUIRE(sep != nullptr);
    CHECK(a.degree(sep->id) == 3);  // multiplicity 2 -> 3 superset links
    CHECK(a.links.size() == 3);
}

TEST_CASE("build: chain separators come from the tree multiset, no {C} node") {
    auto u = letters(5);
    auto jg = junction_graph_of(u, {jt::VarSet{0, 1, 2}, jt::VarSet{1, 2, 3}, jt::VarSet{2, 3, 4}});
    auto t = jt::kruskal_min_cost_tree(jg);
    auto a = jt::build_almond_tree(u, t.cliques, jt::separator_multiset(t));
    CHECK(a.nodes.size() == 5);
    CHECK(separator_node(a, jt::VarSet{1, 2}) != nullptr);
    CHECK(separator_node(a, jt::VarSet{2, 3}) != nullptr);
    CHECK(separator_node(a, jt::VarSet{2}) == nullptr);
}

TEST_CASE("build: a subset separator may link to a superset separator node") {
    // cliques {A,B,C}, {A,B,D}, {A,E}: multiset {{A,B}, {A}}; the {A} node
    // prefers {A,E} (cheapest clique) and then the cheaper {A,B} node over
    // the size-8 cliques
    auto u = letters(5);
    auto jg = junction_graph_of(u, {jt::VarSet{0, 1, 2}, jt::VarSet{0, 1, 3}, jt::VarSet{0, 4}});
    auto t = jt::kruskal_min_cost_tree(jg);
    auto labels = jt::separator_multiset(t);
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].vars == jt::VarSet{0});
    CHECK(labels[1].vars == jt::VarSet{0, 1});

    auto a = jt::build_almond_tree(u, t.cliques, labels);
    const auto* sub = separator_node(a, jt::VarSet{0});
    const auto* super = separator_node(a, jt::VarSet{0, 1});
    REQUIRE(sub != nullptr);
    REQUIRE(super != nullptr);
    std::set<std::pair<int, int>> links;
    for (const auto& l : a.links) links.insert({l.subset, l.superset});
    // {A,B} connects both size-8 cliques; {A} takes {A,E} and the {A,B} node
    int clique_ae = -1;
    for (const auto& n : a.nodes)
        if (n.kind == jt::AlmondNodeKind::clique && n.vars == jt::VarSet{0, 4}) clique_ae = n.id;
    CHECK(links.count({sub->id, clique_ae}) == 1);
    CHECK(links.count({sub->id, super->id}) == 1);
    CHECK(a.degree(super->id) == 3);  // two cliques plus the subset separator
}

TEST_CASE("build: cheapest superset links are taken first") {
    // cliques {A,B}, {A,C,D}, {A,E} with separator {A} twice: all three get
    // linked, and the two cheap table-4 cliques beat the table-8 one in the
    // greedy order (verified against the exhaustive two-link cost minimum)
    auto u = letters(5);
    auto cl = jt::make_cliques(u, {jt::VarSet{0, 1}, jt::VarSet{0, 2, 3}, jt::VarSet{0, 4}});
    std::vector<jt::Separator> multiset{jt::make_separator(*u, jt::VarSet{0}),
                                        jt::make_separator(*u, jt::VarSet{0})};
    auto a = jt::build_almond_tree(u, cl, multiset);
    REQUIRE(a.links.size() == 3);

    // exhaustive check over the three 2-subsets of candidate links
    std::vector<std::uint64_t> costs;
    for (const auto& c : cl) costs.push_back(2 + c.table_size);
    std::uint64_t best = UINT64_MAX;
    for (std::size_t i = 0; i < costs.size(); ++i)
        for (std::size_t j = i + 1; j < costs.size(); ++j)
            best = std::min(best, costs[i] + costs[j]);
    CHECK(best == 12);  // {A,B} and {A,E}, not {A,C,D}

    std::uint64_t greedy_two = 0;
    std::vector<std::uint64_t> link_costs;
    for (const auto& l : a.links) link_costs.push_back(l.cost);
    std::sort(link_costs.begin(), link_costs.end());
    greedy_two = link_costs[0] + link_costs[1];
    CHECK(greedy_two == best);
}

TEST_CASE("build reaches the cost minimum over all valid trees") {
    // hand instances first
    {
        auto u = letters(4);
        auto cl = jt::make_cliques(u, {jt::VarSet{0, 1}, jt::VarSet{0, 2}, jt::VarSet{0, 3}});
        std::vector<jt::Separator> ms{jt::make_separator(*u, jt::VarSet{0}),
                                      jt::make_separator(*u, jt::VarSet{0})};
        auto enumerated = enumerate_almond_trees(u, cl, ms);
        REQUIRE(enumerated.has_value());
        CHECK(enumerated->valid_trees == 1);  // all constructions coincide
        CHECK(jt::build_almond_tree(u, cl, ms).links.size() == 3);
    }
    {
        // the subset-separator instance: greedy must hit the enumerated optimum
        auto u = letters(5);
        auto jg = junction_graph_of(u, {jt::VarSet{0, 1, 2}, jt::VarSet{0, 1, 3}, jt::VarSet{0, 4}});
        auto t = jt::kruskal_min_cost_tree(jg);
        auto ms = jt::separator_multiset(t);
        auto enumerated = enumerate_almond_trees(u, t.cliques, ms);
        REQUIRE(enumerated.has_value());
        auto built = jt::build_almond_tree(u, t.cliques, ms);
        std::uint64_t built_cost = 0;
        for (const auto& l : built.links) built_cost += l.cost;
        CHECK(built_cost == enumerated->min_cost);
    }

    // and random corpora, wherever the combination count stays small
    jt::DeterministicRng rng(97);
    int compared = 0;
    while (compared < 15) {
        auto g = jt::random_chordal_with_clique_range(rng, 2, 6);
        auto cl = jt::make_cliques(g.universe(), jt::cliques(g));
        auto jg = jt::build_junction_graph(g.universe(), std::move(cl));
        auto t = jt::kruskal_min_cost_tree(jg);
        auto ms = jt::separator_multiset(t);
        auto enumerated = enumerate_almond_trees(g.universe(), t.cliques, ms, 200000);
        if (!enumerated) continue;
        auto built = jt::build_almond_tree(g.universe(), t.cliques, ms);
        std::uint64_t built_cost = 0;
        for (const auto& l : built.links) built_cost += l.cost;
        CHECK(built_cost == enumerated->min_cost);
        ++compared;
    }
}

TEST_CASE("contract thins cycles when equal labels sit apart in the tree") {
    // path {A,X} - {A,B,Y} - {A,B,Z} - {A,W} labelled {A}, {A,B}, {A}: the
    // naive merge of the two {A} links closes a cycle through the {A,B}
    // node, so one surplus link must go
    auto u = letters(6);  // A B X Y Z W -> ids 0 1 2 3 4 5
    auto jg = junction_graph_of(u, {jt::VarSet{0, 2}, jt::VarSet{0, 1, 3}, jt::VarSet{0, 1, 4},
                                    jt::VarSet{0, 5}});
    // sorted clique order: {A,X}=id1? sets sort as {0,1,3},{0,1,4},{0,2},{0,5}
    int c_ax = -1, c_aby = -1, c_abz = -1, c_aw = -1;
    for (const auto& c : jg.cliques) {
        if (c.vars == jt::VarSet{0, 2}) c_ax = c.id;
        if (c.vars == jt::VarSet{0, 1, 3}) c_aby = c.id;
        if (c.vars == jt::VarSet{0, 1, 4}) c_abz = c.id;
        if (c.vars == jt::VarSet{0, 5}) c_aw = c.id;
    }
    auto link_between = [&](int a, int b) {
        for (std::size_t i = 0; i < jg.links.size(); ++i)
            if ((jg.links[i].a == std::min(a, b)) && (jg.links[i].b == std::max(a, b)))
                return static_cast<int>(i);
        return -1;
    };
    auto t = jt::tree_from_links(
        jg, {link_between(c_ax, c_aby), link_between(c_aby, c_abz), link_between(c_abz, c_aw)});
    REQUIRE(jt::verify_junction_property(t).holds);

    auto a = jt::contract(t);
    CHECK(a.nodes.size() == 6);
    CHECK(a.links.size() == 5);
    CHECK(jt::has_running_intersection(a));
    const auto* sep_a = separator_node(a, jt::VarSet{0});
    const auto* sep_ab = separator_node(a, jt::VarSet{0, 1});
    REQUIRE(sep_a != nullptr);
    REQUIRE(sep_ab != nullptr);
    CHECK(sep_a->multiplicity == 2);
    CHECK(a.degree(sep_a->id) == 3);
    CHECK(sep_ab->multiplicity == 1);
    CHECK(a.degree(sep_ab->id) == 2);

    // and propagation on the thinned tree still reproduces the marginals
    jt::DeterministicRng rng(89);
    std::vector<jt::Potential> factors;
    for (const auto& c : t.cliques)
        factors.push_back(jt::random_positive_potential(rng, u, c.vars));
    jt::JunctionTreePropagator jprop(t);
    jprop.assign_factors(factors);
    jprop.propagate();
    jt::AlmondPropagator aprop(a);
    aprop.assign_factors(factors);
    aprop.propagate();
    for (std::size_t v = 0; v < u->size(); ++v)
        CHECK(tables_close(jprop.query_marginal(static_cast<jt::VarId>(v)),
                           aprop.query_marginal(static_cast<jt::VarId>(v)), 1e-12));
}

TEST_CASE("budgets: repeated separators save marginalizations, never tables") {
    // star: cliques {A,B}, {A,C}, {A,D}; two junction links labelled {A}
    auto u = letters(4);
    auto jg = junction_graph_of(u, {jt::VarSet{0, 1}, jt::VarSet{0, 2}, jt::VarSet{0, 3}});
    auto t = jt::kruskal_min_cost_tree(jg);
    auto bt = jt::marginalization_budget(t);
    CHECK(bt.marginalizations == 4);
    CHECK(bt.stored_separator_tables == 2);

    auto a = jt::build_almond_tree(u, t.cliques, jt::separator_multiset(t));
    auto ba = jt::marginalization_budget(a);
    CHECK(ba.marginalizations == 3);
    CHECK(ba.stored_separator_tables == 2);
    CHECK(ba.marginalizations < bt.marginalizations);

    // single link: nothing to contract, budgets coincide
    auto two = junction_graph_of(letters(3), {jt::VarSet{0, 1}, jt::VarSet{1, 2}});
    auto t2 = jt::kruskal_min_cost_tree(two);
    auto a2 = jt::contract(t2);
    CHECK(jt::marginalization_budget(t2).marginalizations == 2);
    CHECK(jt::marginalization_budget(a2).marginalizations == 2);
    CHECK(jt::marginalization_budget(t2).stored_separator_tables == 1);
    CHECK(jt::marginalization_budget(a2).stored_separator_tables == 1);

    // chain of three cliques with distinct separators: equal budgets
    auto chain = junction_graph_of(letters(5),
                                   {jt::VarSet{0, 1, 2}, jt::VarSet{1, 2, 3}, jt::VarSet{2, 3, 4}});
    auto t3 = jt::kruskal_min_cost_tree(chain);
    auto a3 = jt::contract(t3);
    CHECK(jt::marginalization_budget(t3).marginalizations == 4);
    CHECK(jt::marginalization_budget(a3).marginalizations == 4);
    CHECK(jt::marginalization_budget(t3).stored_separator_tables == 2);
    CHECK(jt::marginalization_budget(a3).stored_separator_tables == 2);
}

TEST_CASE("random corpus: almond structure and budget laws") {
    jt::DeterministicRng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = jt::random_chordal_with_clique_range(rng, 2, 7);
        auto cl = jt::make_cliques(g.universe(), jt::cliques(g));
        auto jg = jt::build_junction_graph(g.universe(), std::move(cl));
        auto t = jt::kruskal_min_cost_tree(jg);
        auto labels = jt::separator_multiset(t);

        auto contracted = jt::contract(t);
        auto built = jt::build_almond_tree(g.universe(), t.cliques, labels);
        for (const jt::AlmondTree* a : {&contracted, &built}) {
            CHECK(a->links.size() + 1 == a->nodes.size());
            CHECK(jt::has_running_intersection(*a));
            for (const auto& l : a->links)
                CHECK(a->nodes[l.subset].vars.strict_subset_of(a->nodes[l.superset].vars));

            auto bj = jt::marginalization_budget(t);
            auto ba = jt::marginalization_budget(*a);
            bool repeated = false;
            for (std::size_t i = 1; i < labels.size(); ++i)
                repeated = repeated || labels[i].vars == labels[i - 1].vars;
            if (repeated)
                CHECK(ba.marginalizations < bj.marginalizations);
            else
                CHECK(ba.marginalizations == bj.marginalizations);
            // stored tables: degree - 1 at every separator node
            std::size_t stored = 0;
            for (const auto& n : a->nodes)
                if (n.kind == jt::AlmondNodeKind::separator)
                    stored += static_cast<std::size_t>(a->degree(n.id)) - 1;
            CHECK(ba.stored_separator_tables == stored);
        }
    }
}

TEST_CASE("separator-to-separator links propagate in both orientations") {
    // cliques {A,B,C}, {A,B,D}, {A,E}; the {A} node links to the {A,B} node.
    // The root choice flips which of the two separator nodes is the parent,
    // so both projection directions across that link get exercised.
    for (int card_e : {2, 8}) {
        auto u = std::make_shared<jt::Universe>();
        for (const char* name : {"A", "B", "C", "D"}) u->add_variable(name, 2);
        u->add_variable("E", card_e);
        jt::UniversePtr up = u;
        auto jg = junction_graph_of(up, {jt::VarSet{0, 1, 2}, jt::VarSet{0, 1, 3}, jt::VarSet{0, 4}});
        auto t = jt::kruskal_min_cost_tree(jg);
        auto a = jt::build_almond_tree(up, t.cliques, jt::separator_multiset(t));
        REQUIRE(separator_node(a, jt::VarSet{0}) != nullptr);

        jt::DeterministicRng rng(71 + card_e);
        std::vector<jt::Potential> factors;
        for (const auto& c : t.cliques)
            factors.push_back(jt::random_positive_potential(rng, up, c.vars));

        jt::JunctionTreePropagator jprop(t);
        jprop.assign_factors(factors);
        jprop.propagate();
        jt::AlmondPropagator aprop(a);
        aprop.assign_factors(factors);
        aprop.propagate();
        for (std::size_t v = 0; v < up->size(); ++v)
            CHECK(tables_close(jprop.query_marginal(static_cast<jt::VarId>(v)),
                               aprop.query_marginal(static_cast<jt::VarId>(v)), 1e-12));
        CHECK(aprop.counters().projections == jt::marginalization_budget(a).marginalizations);
    }
}

TEST_CASE("almond propagation matches junction propagation") {
    jt::DeterministicRng rng(43);
    for (int trial = 0; trial < 25; ++trial) {
        auto model = trial % 2 == 0 ? jt::random_markov_model(rng, 9)
                                    : jt::random_dag_model(rng, 9);
        auto tri = jt::triangulate_heuristic(model.graph);
        auto cl = jt::make_cliques(model.universe, jt::cliques(tri.graph));
        auto jg = jt::build_junction_graph(model.universe, std::move(cl));
        auto t = jt::kruskal_min_cost_tree(jg);
        auto ev = jt::random_evidence(rng, *model.universe, 2);

        jt::JunctionTreePropagator jprop(t);
        jprop.assign_factors(model.factors);
        jprop.apply_evidence(ev);
        jprop.propagate();

        auto contracted = jt::contract(t);
        auto built = jt::build_almond_tree(model.universe, t.cliques, jt::separator_multiset(t));
        for (const jt::AlmondTree* a : {&contracted, &built}) {
            jt::AlmondPropagator aprop(*a);
            aprop.assign_factors(model.factors);
            aprop.apply_evidence(ev);
            aprop.propagate();

            for (std::size_t v = 0; v < model.universe->size(); ++v)
                CHECK(tables_close(jprop.query_marginal(static_cast<jt::VarId>(v)),
                                   aprop.query_marginal(static_cast<jt::VarId>(v)), 1e-12));

            // separator-node beliefs carry the same marginals the junction
            // tree holds for that label
            for (const auto& n : a->nodes) {
                if (n.kind != jt::AlmondNodeKind::separator) continue;
                int host = -1;
                for (const auto& c : t.cliques)
                    if (n.vars.subset_of(c.vars)) host = c.id;
                REQUIRE(host >= 0);
                auto want = jt::marginalize(jprop.clique_potential(host), n.vars);
                CHECK(tables_close(aprop.belief(n.id).table(), want.table(), 1e-9));
            }

            // instrumented counts match the static budget
            auto budget = jt::marginalization_budget(*a);
            CHECK(aprop.counters().projections == budget.marginalizations);
            CHECK(aprop.counters().projection_cells == budget.projection_cells);
            for (const auto& n : a->nodes)
                if (n.kind == jt::AlmondNodeKind::separator)
                    CHECK(aprop.stored_tables(n.id) ==
                          static_cast<std::size_t>(a->degree(n.id)) - 1);
        }
        auto jbudget = jt::marginalization_budget(t);
        CHECK(jprop.counters().projections == jbudget.marginalizations);
        CHECK(jprop.counters().projection_cells == jbudget.projection_cells);
    }
}
