#pragma once

#include <utility>
#include <vector>

#include "almond.hpp"
#include "junction.hpp"
#include "model.hpp"
#include "propagation.hpp"

namespace junctionc {

struct CompileOptions {
    bool optimal = false;  // exhaustive triangulation instead of the heuristic
    TriangulationObjective objective = TriangulationObjective::fill_count;
    std::size_t optimal_max_vars = 10;
};

// Everything the compilation pipeline produces, from the Markov graph down
// to the minimal-cost junction tree and the canonical separator multiset.
struct CompiledModel {
    ModelFile model;
    UndirectedGraph graph;
    TriangulationResult triangulation;
    std::vector<Clique> cliques;
    JunctionGraph junction_graph;
    JunctionTree tree;
    std::vector<Separator> separators;
};

inline CompiledModel compile_model(ModelFile model, const CompileOptions& opts = {}) {
    UndirectedGraph graph = model_graph(model);
    TriangulationResult tri =
        opts.optimal ? triangulate_optimal(graph, opts.objective, opts.optimal_max_vars)
                     : triangulate_heuristic(graph);
    std::vector<Clique> cl = make_cliques(model.universe, cliques(tri.graph));
    JunctionGraph jg = build_junction_graph(model.universe, cl);
    JunctionTree tree = kruskal_min_cost_tree(jg);
    std::vector<Separator> seps = separator_multiset(tree);
    return CompiledModel{std::move(model), std::move(graph),    std::move(tri), std::move(cl),
                         std::move(jg),    std::move(tree), std::move(seps)};
}

// Ready-to-query propagator for a compiled model.
inline JunctionTreePropagator make_propagator(const CompiledModel& cm, const Evidence& ev = {}) {
    JunctionTreePropagator prop(cm.tree);
    prop.assign_factors(cm.model.factors);
    if (!ev.empty()) prop.apply_evidence(ev);
    prop.propagate();
    return prop;
}

}  // namespace junctionc
