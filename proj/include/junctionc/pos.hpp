#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "potential.hpp"

namespace junctionc {

// 0/1 relation over the configurations of a scope: which configurations
// are possible at all.
class PosRelation {
public:
    PosRelation(UniversePtr universe, VarSet scope, std::vector<std::uint8_t> bits)
        : universe_(std::move(universe)), scope_(std::move(scope)), bits_(std::move(bits)) {
        if (bits_.size() != universe_->table_size(scope_))
            throw SemanticError("relation table length does not match its scope");
        for (auto b : bits_)
            if (b > 1) throw SemanticError("relation entries must be 0 or 1");
    }

    static PosRelation all_ones(UniversePtr universe, VarSet scope) {
        std::vector<std::uint8_t> bits(universe->table_size(scope), 1);
        return PosRelation(std::move(universe), std::move(scope), std::move(bits));
    }

    const VarSet& scope() const { return scope_; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }
    std::uint64_t size() const { return bits_.size(); }
    const UniversePtr& universe() const { return universe_; }

    std::size_t count_ones() const {
        std::size_t n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    bool all_one() const { return count_ones() == bits_.size(); }

    // 0/1 doubles, so relations can ride the regular propagation machinery.
    Potential as_potential() const {
        std::vector<double> t(bits_.begin(), bits_.end());
        return Potential(universe_, scope_, std::move(t));
    }

    friend bool operator==(const PosRelation&, const PosRelation&) = default;

private:
    UniversePtr universe_;
    VarSet scope_;
    std::vector<std::uint8_t> bits_;
};

// Possibility projection of a table: 1 wherever mass is positive.
inline PosRelation pos_of(const Potential& p) {
    std::vector<std::uint8_t> bits(p.size());
    for (std::uint64_t i = 0; i < p.size(); ++i) bits[i] = p.table()[i] > 0.0 ? 1 : 0;
    return PosRelation(p.universe(), p.scope(), std::move(bits));
}

// Existential projection: a target configuration is possible iff some
// extension of it is.
inline PosRelation project(const PosRelation& r, const VarSet& target) {
    if (!target.subset_of(r.scope()))
        throw std::invalid_argument("project: target must be contained in the scope");
    auto map = projection_index_map(*r.universe(), r.scope(), target);
    std::vector<std::uint8_t> bits(r.universe()->table_size(target), 0);
    for (std::uint64_t i = 0; i < r.size(); ++i)
        if (r.bits()[i]) bits[map[i]] = 1;
    return PosRelation(r.universe(), target, std::move(bits));
}

// Pointwise conjunction with s broadcast over r's configurations.
inline PosRelation conjoin(const PosRelation& r, const PosRelation& s) {
    if (!s.scope().subset_of(r.scope()))
        throw std::invalid_argument("conjoin: s's scope must be contained in r's scope");
    auto map = projection_index_map(*r.universe(), r.scope(), s.scope());
    std::vector<std::uint8_t> bits(r.bits());
    for (std::uint64_t i = 0; i < bits.size(); ++i) bits[i] &= s.bits()[map[i]];
    return PosRelation(r.universe(), r.scope(), std::move(bits));
}

// A set of procedures, each confined to a scope, exchanging information
// over the pairwise scope intersections.
struct LocalScheme {
    std::vector<VarSet> scopes;
    std::vector<std::pair<int, int>> channels;  // i < j, nonempty intersection

    static LocalScheme from_scopes(std::vector<VarSet> scopes) {
        LocalScheme s;
        for (std::size_t i = 0; i < scopes.size(); ++i)
            for (std::size_t j = i + 1; j < scopes.size(); ++j)
                if (scopes[i].intersects(scopes[j]))
                    s.channels.emplace_back(static_cast<int>(i), static_cast<int>(j));
        s.scopes = std::move(scopes);
        return s;
    }

    // Graph with a link between two variables iff some scope contains both.
    UndirectedGraph representing_graph(const UniversePtr& u) const {
        UndirectedGraph g(u);
        for (const auto& sc : scopes)
            for (std::size_t i = 0; i < sc.size(); ++i)
                for (std::size_t j = i + 1; j < sc.size(); ++j) g.add_edge(sc[i], sc[j]);
        return g;
    }
};

struct FixpointResult {
    std::vector<PosRelation> relations;
    std::size_t rounds = 0;
    // 1-counts per relation after every round; each column is non-increasing
    std::vector<std::vector<std::size_t>> ones_per_round;
};

// Message-passing to a fixpoint: every procedure repeatedly narrows its
// relation by the projections arriving over its channels and emits its own
// projections in turn. Each message is the existential projection onto the
// channel scope, the strongest information the sender can offer. Tables
// only lose ones, so this terminates.
inline FixpointResult fixpoint_local_propagation(const LocalScheme& scheme,
                                                 std::vector<PosRelation> relations) {
    if (relations.size() != scheme.scopes.size())
        throw std::invalid_argument("fixpoint: one relation per scope required");
    for (std::size_t i = 0; i < relations.size(); ++i)
        if (relations[i].scope() != scheme.scopes[i])
            throw std::invalid_argument("fixpoint: relation scope mismatch at index " +
                                        std::to_string(i));

    FixpointResult out;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [i, j] : scheme.channels) {
            VarSet chan = set_intersection(scheme.scopes[i], scheme.scopes[j]);
            auto updated_j = conjoin(relations[j], project(relations[i], chan));
            if (updated_j.bits() != relations[j].bits()) {
                relations[j] = std::move(updated_j);
                changed = true;
            }
            auto updated_i = conjoin(relations[i], project(relations[j], chan));
            if (updated_i.bits() != relations[i].bits()) {
                relations[i] = std::move(updated_i);
                changed = true;
            }
        }
        std::vector<std::size_t> counts;
        counts.reserve(relations.size());
        for (const auto& r : relations) counts.push_back(r.count_ones());
        out.ones_per_round.push_back(std::move(counts));
        ++out.rounds;
    }
    out.relations = std::move(relations);
    return out;
}

struct TriangulationWitness {
    bool contains_triangulation = false;
    std::vector<VarId> witness_cycle;  // chordless cycle of length >= 4 when negative
    explicit operator bool() const { return contains_triangulation; }
};

// Does the scheme's representing graph contain a triangulation of g?
// Decided at desk scale by requiring g's edges to be present and the
// representing graph (over g's variables) to be chordal.
inline TriangulationWitness check_hidden_triangulation(const UndirectedGraph& g,
                                                       const LocalScheme& scheme) {
    UndirectedGraph rep = scheme.representing_graph(g.universe());
    for (auto [a, b] : g.edges())
        if (!rep.has_edge(a, b))
            throw std::invalid_argument("scheme scopes do not cover the graph: missing edge " +
                                        g.universe()->name(a) + "-" + g.universe()->name(b));
    auto verdict = is_chordal(rep);
    if (verdict) return {true, {}};
    return {false, verdict.witness_cycle};
}

// The executable counterexample: a cycle of variables whose pairwise
// relations force alternating equalities, with two free edges. Clamping
// the first free edge to an equality pins the whole cycle, but a local
// scheme on the cycle's edges can only exchange single-variable
// projections and never narrows the far free edge.
struct Example1Instance {
    UniversePtr universe;
    std::vector<VarSet> scopes;           // one per cycle edge
    std::vector<PosRelation> relations;   // initial tables
    PosRelation clamped;                  // equality that replaces relations[0]
    int far_edge = -1;                    // index of the opposite free edge

    UndirectedGraph cycle_graph() const {
        UndirectedGraph g(universe);
        for (const auto& sc : scopes) g.add_edge(sc[0], sc[1]);
        return g;
    }
};

namespace detail {

// 1 iff both variables take the same state among the first `live` states.
inline PosRelation equality_relation(const UniversePtr& u, VarId x, VarId y, int live) {
    VarSet scope{x, y};
    auto strides = scope_strides(*u, scope);
    std::vector<std::uint8_t> bits(u->table_size(scope), 0);
    for (int s = 0; s < live; ++s)
        bits[static_cast<std::size_t>(s) * strides[0] + static_cast<std::size_t>(s) * strides[1]] = 1;
    return PosRelation(u, scope, std::move(bits));
}

// 1 iff both variables stay among the first `live` states.
inline PosRelation free_relation(const UniversePtr& u, VarId x, VarId y, int live) {
    VarSet scope{x, y};
    auto strides = scope_strides(*u, scope);
    std::vector<std::uint8_t> bits(u->table_size(scope), 0);
    for (int s = 0; s < live; ++s)
        for (int t = 0; t < live; ++t)
            bits[static_cast<std::size_t>(s) * strides[0] + static_cast<std::size_t>(t) * strides[1]] = 1;
    return PosRelation(u, scope, std::move(bits));
}

}  // namespace detail

// Builds the counterexample instance on a cycle of `cycle_length`
// variables. Edge 0 and the opposite edge start fully free; every other
// edge is an equality, which is the clamping that extends the 4-variable
// construction to longer cycles. Only the first two states take part.
inline Example1Instance build_example1_instance(int cycle_length, int states_per_variable = 2) {
    if (cycle_length < 4)
        throw std::invalid_argument("build_example1_instance: cycle length must be >= 4");
    if (states_per_variable < 2)
        throw std::invalid_argument("build_example1_instance: need at least two states");

    auto u = std::make_shared<Universe>();
    if (cycle_length == 4) {
        // Cycle A - B - D - C - A, the classic 4-variable instance.
        for (const char* name : {"A", "B", "D", "C"}) u->add_variable(name, states_per_variable);
    } else {
        for (int i = 0; i < cycle_length; ++i)
            u->add_variable("V" + std::to_string(i), states_per_variable);
    }
    UniversePtr universe = u;

    constexpr int kLive = 2;
    const int far_edge = cycle_length / 2;
    std::vector<VarSet> scopes;
    std::vector<PosRelation> relations;
    for (int e = 0; e < cycle_length; ++e) {
        VarId x = static_cast<VarId>(e);
        VarId y = static_cast<VarId>((e + 1) % cycle_length);
        scopes.push_back(VarSet{x, y});
        if (e == 0 || e == far_edge)
            relations.push_back(detail::free_relation(universe, x, y, kLive));
        else
            relations.push_back(detail::equality_relation(universe, x, y, kLive));
    }
    return Example1Instance{universe, std::move(scopes), std::move(relations),
                            detail::equality_relation(universe, 0, 1, kLive), far_edge};
}

}  // namespace junctionc
