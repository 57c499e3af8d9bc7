#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "junction.hpp"
#include "potential.hpp"
#include "propagation.hpp"

namespace junctionc {

// mt19937_64 behind helpers whose outputs depend only on the seed, so
// reports built from them are reproducible byte for byte.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    double uniform_real(double lo, double hi) {
        double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + unit * (hi - lo);
    }

    bool bernoulli(double p) { return uniform_real(0.0, 1.0) < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1))]);
    }

private:
    std::mt19937_64 engine_;
};

inline UniversePtr random_universe(DeterministicRng& rng, int n, int min_card = 2,
                                   int max_card = 2) {
    auto u = std::make_shared<Universe>();
    for (int i = 0; i < n; ++i)
        u->add_variable("X" + std::to_string(i), rng.uniform_int(min_card, max_card));
    return u;
}

// Random spanning tree plus extra edges with probability `extra_edge_prob`.
inline UndirectedGraph random_connected_graph(DeterministicRng& rng, const UniversePtr& u,
                                              double extra_edge_prob) {
    const int n = static_cast<int>(u->size());
    UndirectedGraph g(u);
    std::vector<VarId> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    rng.shuffle(ids);
    for (int i = 1; i < n; ++i) g.add_edge(ids[i], ids[rng.uniform_int(0, i - 1)]);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (!g.has_edge(a, b) && rng.bernoulli(extra_edge_prob)) g.add_edge(a, b);
    return g;
}

// Random connected graph filled along a random elimination order; the
// result is chordal and connected.
inline UndirectedGraph random_chordal_graph(DeterministicRng& rng, const UniversePtr& u,
                                            double extra_edge_prob) {
    UndirectedGraph g = random_connected_graph(rng, u, extra_edge_prob);
    std::vector<VarId> order(u->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<VarId>(i);
    rng.shuffle(order);
    return eliminate_with_order(g, EliminationOrder{std::move(order)}).graph;
}

// Random parent sets respecting the id order, at most `max_parents` each.
inline Dag random_dag(DeterministicRng& rng, const UniversePtr& u, int max_parents = 3) {
    Dag d(u);
    const int n = static_cast<int>(u->size());
    for (int child = 1; child < n; ++child) {
        int k = std::min(child, rng.uniform_int(0, max_parents));
        std::vector<VarId> pool(child);
        for (int i = 0; i < child; ++i) pool[i] = i;
        rng.shuffle(pool);
        for (int i = 0; i < k; ++i) d.add_edge(pool[i], child);
    }
    return d;
}

struct RandomModel {
    UniversePtr universe;
    UndirectedGraph graph;         // already moralized when dag-born
    std::vector<Potential> factors;
};

// Strictly positive factor tables keep random evidence satisfiable.
inline Potential random_positive_potential(DeterministicRng& rng, const UniversePtr& u,
                                           const VarSet& scope) {
    std::vector<double> t(u->table_size(scope));
    for (double& x : t) x = rng.uniform_real(0.1, 1.0);
    return Potential(u, scope, std::move(t));
}

// Markov network over a random chordal graph, one factor per clique. The
// edge density is itself randomized so the corpus mixes chain-like and
// star-like clique structures.
inline RandomModel random_markov_model(DeterministicRng& rng, int max_vars) {
    int n = rng.uniform_int(3, max_vars);
    auto u = random_universe(rng, n);
    UndirectedGraph g = random_chordal_graph(rng, u, rng.uniform_real(0.0, 0.4));
    RandomModel model{u, g, {}};
    for (const auto& c : cliques(g)) model.factors.push_back(random_positive_potential(rng, u, c));
    return model;
}

// Bayesian-network-shaped model: one factor per family, moralized graph.
inline RandomModel random_dag_model(DeterministicRng& rng, int max_vars) {
    int n = rng.uniform_int(3, max_vars);
    auto u = random_universe(rng, n);
    // keep drawing until the moral graph is connected
    for (;;) {
        Dag d = random_dag(rng, u, 3);
        UndirectedGraph g = moralize(d);
        if (!g.is_connected()) continue;
        RandomModel model{u, g, {}};
        for (std::size_t child = 0; child < u->size(); ++child) {
            VarSet family{static_cast<VarId>(child)};
            for (VarId p : d.parents(static_cast<VarId>(child))) family.insert(p);
            model.factors.push_back(random_positive_potential(rng, u, family));
        }
        return model;
    }
}

inline Evidence random_evidence(DeterministicRng& rng, const Universe& u, int max_observed) {
    Evidence ev;
    int k = rng.uniform_int(0, std::min(max_observed, static_cast<int>(u.size())));
    std::vector<VarId> pool(u.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<VarId>(i);
    rng.shuffle(pool);
    for (int i = 0; i < k; ++i)
        ev.observe(pool[i], rng.uniform_int(0, u.cardinality(pool[i]) - 1));
    return ev;
}

// Random connected chordal graph whose clique count lands in
// [min_cliques, max_cliques]; used by the theorem-verification corpora.
// Sparse draws keep many small cliques (dense junction graphs), dense
// draws merge them into fewer large ones.
inline UndirectedGraph random_chordal_with_clique_range(DeterministicRng& rng, int min_cliques,
                                                        int max_cliques, int min_card = 2,
                                                        int max_card = 3) {
    for (;;) {
        int n = rng.uniform_int(min_cliques + 1, max_cliques + 3);
        auto u = random_universe(rng, n, min_card, max_card);
        UndirectedGraph g = random_chordal_graph(rng, u, rng.uniform_real(0.0, 0.35));
        int k = static_cast<int>(cliques(g).size());
        if (k >= min_cliques && k <= max_cliques) return g;
    }
}

}  // namespace junctionc
