#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "graph.hpp"
#include "potential.hpp"

namespace junctionc {

inline constexpr const char* kModelVersion = "junctionc-model-1";
inline constexpr const char* kTableOrdering = "sorted-scope, last-fastest";

// In-memory form of a model document: variables with named states, factor
// tables over sorted scopes, and optionally a dag whose moral graph is the
// Markov structure.
struct ModelFile {
    UniversePtr universe;
    std::vector<std::vector<std::string>> state_labels;  // per variable
    std::vector<Potential> factors;
    std::optional<Dag> dag;
};

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
    return *it;
}

}  // namespace detail

inline ModelFile parse_model_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model is not valid json: ") + e.what());
    }
    try {
        if (!j.is_object()) throw ParseError("model document must be a json object");

        if (detail::field(j, "version").get<std::string>() != kModelVersion)
            throw SemanticError("unsupported model version '" +
                                detail::field(j, "version").get<std::string>() + "'");
        // The ordering convention is stamped into the file so a mismatched
        // producer fails loudly instead of silently permuting tables.
        if (detail::field(j, "ordering").get<std::string>() != kTableOrdering)
            throw SemanticError("unsupported table ordering '" +
                                detail::field(j, "ordering").get<std::string>() +
                                "'; expected '" + std::string(kTableOrdering) + "'");

        auto universe = std::make_shared<Universe>();
        std::vector<std::vector<std::string>> labels;
        for (const auto& var : detail::field(j, "variables")) {
            std::string name = detail::field(var, "name").get<std::string>();
            std::vector<std::string> states =
                detail::field(var, "states").get<std::vector<std::string>>();
            if (states.empty())
                throw SemanticError("variable '" + name + "' has no states");
            universe->add_variable(name, static_cast<int>(states.size()));
            labels.push_back(std::move(states));
        }
        if (universe->size() == 0) throw SemanticError("model declares no variables");
        UniversePtr u = universe;

        ModelFile m{u, std::move(labels), {}, std::nullopt};
        for (const auto& fac : detail::field(j, "factors")) {
            std::vector<VarId> scope_ids;
            for (const auto& name : detail::field(fac, "scope")) {
                VarId v = u->find(name.get<std::string>());
                if (v < 0)
                    throw SemanticError("factor scope names unknown variable '" +
                                        name.get<std::string>() + "'");
                scope_ids.push_back(v);
            }
            VarSet scope(scope_ids);
            if (scope.size() != scope_ids.size())
                throw SemanticError("factor scope repeats a variable");
            std::vector<double> table = detail::field(fac, "table").get<std::vector<double>>();
            if (table.size() != u->table_size(scope))
                throw SemanticError("factor over " + format_varset(*u, scope) + " has " +
                                    std::to_string(table.size()) + " entries, expected " +
                                    std::to_string(u->table_size(scope)));
            Potential p(u, scope, std::move(table));
            if (p.all_zero())
                throw SemanticError("factor over " + format_varset(*u, scope) + " is all zero");
            m.factors.push_back(std::move(p));
        }

        if (j.contains("dag")) {
            Dag d(u);
            for (const auto& e : detail::field(j["dag"], "edges")) {
                if (!e.is_array() || e.size() != 2)
                    throw ParseError("dag edges must be [parent, child] pairs");
                VarId p = u->find(e[0].get<std::string>());
                VarId c = u->find(e[1].get<std::string>());
                if (p < 0 || c < 0) throw SemanticError("dag edge names an unknown variable");
                d.add_edge(p, c);
            }
            if (!d.topological_order())
                throw SemanticError("dag contains a directed cycle");
            m.dag = std::move(d);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model field: ") + e.what());
    }
}

inline ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_text(buf.str());
}

// Canonical serialization; parsing it back reproduces the model exactly.
inline std::string serialize_model(const ModelFile& m) {
    nlohmann::ordered_json j;
    j["version"] = kModelVersion;
    j["ordering"] = kTableOrdering;
    j["variables"] = nlohmann::ordered_json::array();
    for (std::size_t v = 0; v < m.universe->size(); ++v) {
        nlohmann::ordered_json var;
        var["name"] = m.universe->name(static_cast<VarId>(v));
        var["states"] = m.state_labels[v];
        j["variables"].push_back(std::move(var));
    }
    j["factors"] = nlohmann::ordered_json::array();
    for (const auto& f : m.factors) {
        nlohmann::ordered_json fac;
        fac["scope"] = nlohmann::ordered_json::array();
        for (VarId v : f.scope()) fac["scope"].push_back(m.universe->name(v));
        fac["table"] = f.table();
        j["factors"].push_back(std::move(fac));
    }
    if (m.dag) {
        nlohmann::ordered_json edges = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < m.universe->size(); ++c)
            for (VarId p : m.dag->parents(static_cast<VarId>(c)))
                edges.push_back({m.universe->name(p), m.universe->name(static_cast<VarId>(c))});
        j["dag"]["edges"] = std::move(edges);
    }
    return j.dump(2) + "\n";
}

// Markov structure of the model: the moral graph when a dag is present,
// otherwise links between all co-scoped variables.
inline UndirectedGraph model_graph(const ModelFile& m) {
    if (m.dag) return moralize(*m.dag);
    UndirectedGraph g(m.universe);
    for (const auto& f : m.factors)
        for (std::size_t i = 0; i < f.scope().size(); ++i)
            for (std::size_t k = i + 1; k < f.scope().size(); ++k)
                g.add_edge(f.scope()[i], f.scope()[k]);
    return g;
}

// Wraps a chordal graph as a replayable model: default state names and one
// neutral factor per clique, so the factor scopes reproduce the graph.
inline ModelFile model_from_chordal_graph(const UndirectedGraph& g) {
    std::vector<std::vector<std::string>> labels;
    for (std::size_t v = 0; v < g.universe()->size(); ++v) {
        std::vector<std::string> states;
        for (int s = 0; s < g.universe()->cardinality(static_cast<VarId>(v)); ++s)
            states.push_back("s" + std::to_string(s));
        labels.push_back(std::move(states));
    }
    ModelFile m{g.universe(), std::move(labels), {}, std::nullopt};
    for (const auto& c : cliques(g))
        m.factors.push_back(Potential::neutral(g.universe(), c));
    return m;
}

}  // namespace junctionc
