// junctionc: compile discrete models into optimal junction trees, run exact
// queries, and re-check the tree-construction theorems on random corpora.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <junctionc/junctionc.hpp>
#include <junctionc/oracle.hpp>

namespace {

using namespace junctionc;

// fixed-width float formatting keeps reports byte-identical across runs
std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string label_list(const Universe& u, const VarSet& s) { return format_varset(u, s); }

int resolve_state(const ModelFile& m, VarId v, const std::string& token) {
    const auto& labels = m.state_labels[static_cast<std::size_t>(v)];
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == token) return static_cast<int>(i);
    try {
        std::size_t pos = 0;
        int idx = std::stoi(token, &pos);
        if (pos == token.size() && idx >= 0 &&
            idx < m.universe->cardinality(v))
            return idx;
    } catch (...) {
    }
    throw SemanticError("unknown state '" + token + "' for variable " + m.universe->name(v));
}

Evidence parse_evidence(const ModelFile& m, const std::vector<std::string>& tokens) {
    Evidence ev;
    for (const auto& tok : tokens) {
        auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw SemanticError("evidence must look like VAR=STATE, got '" + tok + "'");
        std::string var = tok.substr(0, eq);
        VarId v = m.universe->find(var);
        if (v < 0) throw SemanticError("evidence names unknown variable '" + var + "'");
        ev.observe(v, resolve_state(m, v, tok.substr(eq + 1)));
    }
    return ev;
}

// ---------------------------------------------------------------- compile

struct CompileArgs {
    std::string model_path;
    std::string objective = "fill";
    bool optimal = false;
    bool almond = false;
    std::string emit = "text";
};

void report_compile_text(std::ostream& os, const CompiledModel& cm, bool almond) {
    const auto& u = *cm.model.universe;
    os << "variables: " << u.size() << "  factors: " << cm.model.factors.size() << "\n";
    os << "graph: " << cm.graph.num_vars() << " nodes, " << cm.graph.num_edges() << " edges"
       << (cm.model.dag ? " (moralized dag)" : "") << "\n";
    os << "fill-ins: " << cm.triangulation.fill_ins.size();
    for (auto [a, b] : cm.triangulation.fill_ins)
        os << " {" << u.name(a) << "," << u.name(b) << "}";
    os << "\n";
    os << "cliques: " << cm.cliques.size() << "\n";
    for (const auto& c : cm.cliques)
        os << "  " << c.id << ": " << label_list(u, c.vars) << " size " << c.table_size << "\n";
    os << "separator multiset:";
    if (cm.separators.empty()) os << " (empty)";
    for (const auto& s : cm.separators) os << " " << label_list(u, s.vars);
    os << "\n";
    os << "junction tree: weight " << cm.tree.total_weight << ", cost " << cm.tree.total_cost
       << "\n";
    for (const auto& l : cm.tree.links)
        os << "  " << label_list(u, cm.cliques[l.a].vars) << " -- "
           << label_list(u, cm.cliques[l.b].vars) << "  sep " << label_list(u, l.separator.vars)
           << " w" << l.weight << " c" << l.cost << "\n";
    auto jb = marginalization_budget(cm.tree);
    os << "junction budget: marginalizations " << jb.marginalizations << ", stored tables "
       << jb.stored_separator_tables << ", projection cells " << jb.projection_cells << "\n";
    if (almond) {
        auto a = build_almond_tree(cm.model.universe, cm.tree.cliques, cm.separators);
        auto ab = marginalization_budget(a);
        os << "almond tree: " << a.nodes.size() << " nodes (" << a.num_cliques << " cliques, "
           << a.nodes.size() - a.num_cliques << " separators), " << a.links.size() << " links\n";
        for (const auto& l : a.links)
            os << "  " << label_list(u, a.nodes[l.subset].vars) << " -> "
               << label_list(u, a.nodes[l.superset].vars) << " c" << l.cost << "\n";
        os << "almond budget: marginalizations " << ab.marginalizations << ", stored tables "
           << ab.stored_separator_tables << ", projection cells " << ab.projection_cells << "\n";
    }
}

void report_compile_json(std::ostream& os, const CompiledModel& cm, bool almond) {
    const auto& u = *cm.model.universe;
    nlohmann::ordered_json j;
    j["variables"] = u.size();
    j["factors"] = cm.model.factors.size();
    j["fill_ins"] = nlohmann::ordered_json::array();
    for (auto [a, b] : cm.triangulation.fill_ins) j["fill_ins"].push_back({u.name(a), u.name(b)});
    j["cliques"] = nlohmann::ordered_json::array();
    for (const auto& c : cm.cliques) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["vars"] = nlohmann::ordered_json::array();
        for (VarId v : c.vars) cj["vars"].push_back(u.name(v));
        cj["table_size"] = c.table_size;
        j["cliques"].push_back(std::move(cj));
    }
    j["separators"] = nlohmann::ordered_json::array();
    for (const auto& s : cm.separators) {
        nlohmann::ordered_json sj = nlohmann::ordered_json::array();
        for (VarId v : s.vars) sj.push_back(u.name(v));
        j["separators"].push_back(std::move(sj));
    }
    j["tree"]["weight"] = cm.tree.total_weight;
    j["tree"]["cost"] = cm.tree.total_cost;
    j["tree"]["links"] = nlohmann::ordered_json::array();
    for (const auto& l : cm.tree.links)
        j["tree"]["links"].push_back({{"a", l.a}, {"b", l.b}, {"weight", l.weight}, {"cost", l.cost}});
    auto jb = marginalization_budget(cm.tree);
    j["tree"]["budget"] = {{"marginalizations", jb.marginalizations},
                           {"stored_tables", jb.stored_separator_tables},
                           {"projection_cells", jb.projection_cells}};
    if (almond) {
        auto a = build_almond_tree(cm.model.universe, cm.tree.cliques, cm.separators);
        auto ab = marginalization_budget(a);
        j["almond"]["nodes"] = a.nodes.size();
        j["almond"]["links"] = a.links.size();
        j["almond"]["budget"] = {{"marginalizations", ab.marginalizations},
                                 {"stored_tables", ab.stored_separator_tables},
                                 {"projection_cells", ab.projection_cells}};
    }
    os << j.dump(2) << "\n";
}

int run_compile(const CompileArgs& args) {
    ModelFile model = load_model_file(args.model_path);
    CompileOptions opts;
    opts.optimal = args.optimal;
    opts.objective = args.objective == "weight" ? TriangulationObjective::clique_weight
                                                : TriangulationObjective::fill_count;
    CompiledModel cm = compile_model(std::move(model), opts);
    if (args.emit == "json")
        report_compile_json(std::cout, cm, args.almond);
    else
        report_compile_text(std::cout, cm, args.almond);
    return 0;
}

// ------------------------------------------------------------------ query

struct QueryArgs {
    std::string model_path;
    std::vector<std::string> evidence;
    std::vector<std::string> marginals;
    std::string emit = "text";
};

int run_query(const QueryArgs& args) {
    ModelFile model = load_model_file(args.model_path);
    Evidence ev = parse_evidence(model, args.evidence);
    CompiledModel cm = compile_model(std::move(model), {});
    JunctionTreePropagator prop = make_propagator(cm, ev);

    std::vector<VarId> targets;
    if (args.marginals.empty()) {
        for (std::size_t v = 0; v < cm.model.universe->size(); ++v)
            targets.push_back(static_cast<VarId>(v));
    } else {
        for (const auto& name : args.marginals) {
            VarId v = cm.model.universe->find(name);
            if (v < 0) throw SemanticError("query names unknown variable '" + name + "'");
            targets.push_back(v);
        }
    }

    if (args.emit == "json") {
        nlohmann::ordered_json j;
        for (VarId v : targets) {
            auto dist = prop.query_marginal(v);
            nlohmann::ordered_json vj;
            for (std::size_t s = 0; s < dist.size(); ++s)
                vj[cm.model.state_labels[static_cast<std::size_t>(v)][s]] = dist[s];
            j[cm.model.universe->name(v)] = std::move(vj);
        }
        std::cout << j.dump(2) << "\n";
    } else {
        for (VarId v : targets) {
            auto dist = prop.query_marginal(v);
            std::cout << cm.model.universe->name(v) << ":";
            for (std::size_t s = 0; s < dist.size(); ++s)
                std::cout << " " << cm.model.state_labels[static_cast<std::size_t>(v)][s] << "="
                          << fmt(dist[s]);
            std::cout << "\n";
        }
    }
    return 0;
}

// ----------------------------------------------------------------- verify

struct VerifyArgs {
    std::string suite = "all";
    std::optional<std::uint64_t> seed;
    int cases = 200;
};

struct SuiteResult {
    std::string name;
    int cases = 0;
    int failures = 0;
};

void dump_failing_graph(const UndirectedGraph& g, int case_index) {
    std::cout << "failing instance (case " << case_index << ") as a model file:\n";
    std::cout << serialize_model(model_from_chordal_graph(g));
}

// Random chordal corpus checks for the spanning-tree theorems. Enumeration
// is capped, so oversized junction graphs are redrawn.
SuiteResult run_tree_suite(const std::string& name, std::uint64_t seed, int cases) {
    DeterministicRng rng(seed);
    SuiteResult res{name, cases, 0};
    for (int k = 0; k < cases; ++k) {
        UndirectedGraph g = random_chordal_with_clique_range(rng, 3, 8);
        auto jg = build_junction_graph(g.universe(), make_cliques(g.universe(), cliques(g)));
        while (oracle::count_spanning_trees(jg) > 400000.0) {
            g = random_chordal_with_clique_range(rng, 3, 8);
            jg = build_junction_graph(g.universe(), make_cliques(g.universe(), cliques(g)));
        }
        auto records = oracle::enumerate_spanning_trees(jg);
        std::uint64_t max_weight = 0;
        for (const auto& r : records) max_weight = std::max(max_weight, r.total_weight);

        bool ok = true;
        if (name == "theorem1") {
            for (const auto& r : records)
                ok = ok && (r.junction_property == (r.total_weight == max_weight));
        } else if (name == "corollary1") {
            std::vector<Separator> reference;
            bool first = true;
            for (const auto& r : records) {
                if (r.total_weight != max_weight) continue;
                auto labels = separator_multiset(tree_from_links(jg, r.links));
                if (first) {
                    reference = labels;
                    first = false;
                    continue;
                }
                ok = ok && labels.size() == reference.size();
                for (std::size_t i = 0; ok && i < labels.size(); ++i)
                    ok = labels[i].vars == reference[i].vars;
            }
        } else {  // theorem2 (+ the prim variant)
            std::uint64_t min_cost = 0;
            bool first = true;
            for (const auto& r : records) {
                if (r.total_weight != max_weight) continue;
                if (first || r.total_cost < min_cost) min_cost = r.total_cost;
                first = false;
            }
            auto kt = kruskal_min_cost_tree(jg);
            auto pt = prim_max_spanning_tree(jg);
            ok = kt.total_weight == max_weight && kt.total_cost == min_cost &&
                 pt.total_weight == max_weight && pt.total_cost == min_cost;
        }
        if (!ok) {
            ++res.failures;
            dump_failing_graph(g, k);
        }
    }
    return res;
}

SuiteResult run_example1_suite() {
    SuiteResult res{"example1", 3, 0};
    for (int n : {4, 5, 6}) {
        auto inst = build_example1_instance(n);
        auto scheme = LocalScheme::from_scopes(inst.scopes);
        auto relations = inst.relations;
        relations[0] = inst.clamped;
        auto fix = fixpoint_local_propagation(scheme, relations);
        const auto& far = fix.relations[static_cast<std::size_t>(inst.far_edge)];

        // the triangulated route for the same instance
        std::vector<Potential> factors;
        for (std::size_t e = 0; e < inst.relations.size(); ++e)
            factors.push_back((e == 0 ? inst.clamped : inst.relations[e]).as_potential());
        auto graph = inst.cycle_graph();
        auto tri = triangulate_heuristic(graph);
        auto t = kruskal_min_cost_tree(build_junction_graph(
            inst.universe, make_cliques(inst.universe, cliques(tri.graph))));
        JunctionTreePropagator prop(t);
        prop.assign_factors(factors);
        prop.propagate();
        auto true_far = pos_of(prop.marginal_on(inst.scopes[static_cast<std::size_t>(inst.far_edge)]));

        bool local_stuck = far.all_one();
        bool exact_diag = true;
        {
            auto strides = scope_strides(*inst.universe, true_far.scope());
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    auto idx = static_cast<std::size_t>(i) * strides[0] +
                               static_cast<std::size_t>(j) * strides[1];
                    exact_diag = exact_diag && (true_far.bits()[idx] == (i == j ? 1 : 0));
                }
        }
        auto witness = check_hidden_triangulation(graph, scheme);
        bool witness_ok = !witness.contains_triangulation &&
                          witness.witness_cycle.size() >= 4;

        if (n == 4) {
            const auto& u = *inst.universe;
            std::cout << "n=4 local fixpoint on " << format_varset(u, far.scope()) << ":";
            for (auto b : far.bits()) std::cout << " " << int(b);
            std::cout << "\n     exact projection:";
            for (auto b : true_far.bits()) std::cout << " " << int(b);
            std::cout << "\n";
        }
        if (!(local_stuck && exact_diag && witness_ok)) ++res.failures;
    }
    return res;
}

int run_verify(const VerifyArgs& args) {
    std::uint64_t seed = 1;
    if (args.seed) {
        seed = *args.seed;
    } else if (const char* env = std::getenv("JUNCTIONC_SEED")) {
        seed = std::strtoull(env, nullptr, 10);
    }
    std::cout << "verify suite=" << args.suite << " seed=" << seed << " cases=" << args.cases
              << "\n";

    std::vector<SuiteResult> results;
    auto want = [&](const std::string& s) { return args.suite == "all" || args.suite == s; };
    if (want("theorem1")) results.push_back(run_tree_suite("theorem1", seed, args.cases));
    if (want("corollary1")) results.push_back(run_tree_suite("corollary1", seed, args.cases));
    if (want("theorem2")) results.push_back(run_tree_suite("theorem2", seed, args.cases));
    if (want("example1")) results.push_back(run_example1_suite());

    int failures = 0;
    for (const auto& r : results) {
        std::cout << r.name << ": " << (r.cases - r.failures) << "/" << r.cases << " cases ok\n";
        failures += r.failures;
    }
    std::cout << (failures == 0 ? "PASS" : "FAIL") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"junction tree compiler and exact inference engine"};
    app.require_subcommand(1);

    CompileArgs cargs;
    auto* cmd_compile = app.add_subcommand("compile", "compile a model and report statistics");
    cmd_compile->add_option("model", cargs.model_path, "model file")->required();
    cmd_compile->add_option("--objective", cargs.objective, "triangulation objective")
        ->check(CLI::IsMember({"fill", "weight"}));
    cmd_compile->add_flag("--optimal", cargs.optimal, "exhaustive optimal triangulation");
    cmd_compile->add_flag("--almond", cargs.almond, "also build and report the Almond tree");
    cmd_compile->add_option("--emit", cargs.emit, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    QueryArgs qargs;
    auto* cmd_query = app.add_subcommand("query", "compute posterior marginals");
    cmd_query->add_option("model", qargs.model_path, "model file")->required();
    cmd_query->add_option("--evidence", qargs.evidence, "observations VAR=STATE");
    cmd_query->add_option("--marginal", qargs.marginals, "variables to report (default: all)");
    cmd_query->add_option("--emit", qargs.emit, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    VerifyArgs vargs;
    auto* cmd_verify = app.add_subcommand("verify", "re-check the construction theorems");
    cmd_verify->add_option("--suite", vargs.suite, "which suite to run")
        ->check(CLI::IsMember({"theorem1", "theorem2", "corollary1", "example1", "all"}));
    std::uint64_t seed_opt = 0;
    auto* seed_flag = cmd_verify->add_option("--seed", seed_opt, "rng seed");
    cmd_verify->add_option("--cases", vargs.cases, "random cases per suite")
        ->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_compile->parsed()) return run_compile(cargs);
        if (cmd_query->parsed()) return run_query(qargs);
        if (seed_flag->count() > 0) vargs.seed = seed_opt;
        return run_verify(vargs);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ImpossibleEvidenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
