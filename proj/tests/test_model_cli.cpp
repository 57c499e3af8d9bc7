#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "test_support.hpp"

namespace {

const std::string kModelsDir = JUNCTIONC_MODELS_DIR;
const std::string kCli = JUNCTIONC_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    std::string cmd = kCli + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), buf.size(), pipe)) res.output += buf.data();
    int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string write_temp_model(const std::string& name, const std::string& text) {
    std::string path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                       "/junctionc_test_" + name + ".json";
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("model files round-trip through serialization") {
    auto m = jt::load_model_file(kModelsDir + "/chain.json");
    REQUIRE(m.universe->size() == 3);
    CHECK(m.state_labels[0] == std::vector<std::string>{"no", "yes"});
    REQUIRE(m.dag.has_value());

    auto text = jt::serialize_model(m);
    auto m2 = jt::parse_model_text(text);
    CHECK(m2.universe->size() == m.universe->size());
    CHECK(m2.state_labels == m.state_labels);
    REQUIRE(m2.factors.size() == m.factors.size());
    for (std::size_t i = 0; i < m.factors.size(); ++i) {
        CHECK(m2.factors[i].scope() == m.factors[i].scope());
        CHECK(m2.factors[i].table() == m.factors[i].table());  // bit-exact
    }
    REQUIRE(m2.dag.has_value());
    for (std::size_t v = 0; v < m.universe->size(); ++v)
        CHECK(m2.dag->parents(static_cast<jt::VarId>(v)) ==
              m.dag->parents(static_cast<jt::VarId>(v)));
    // serialization is canonical: a second round emits the same bytes
    CHECK(jt::serialize_model(m2) == text);
}

TEST_CASE("failure-replay dumps reproduce the original graph") {
    jt::DeterministicRng rng(83);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = jt::random_chordal_with_clique_range(rng, 2, 6);
        auto dump = jt::serialize_model(jt::model_from_chordal_graph(g));
        auto replay = jt::parse_model_text(dump);
        CHECK(jt::model_graph(replay) == g);
        CHECK(jt::serialize_model(replay) == dump);
    }
}

TEST_CASE("markov models derive their graph from factor scopes") {
    auto m = jt::load_model_file(kModelsDir + "/fourcycle.json");
    auto g = jt::model_graph(m);
    CHECK(g.num_edges() == 4);
    CHECK_FALSE(jt::is_chordal(g).chordal);

    auto dagm = jt::load_model_file(kModelsDir + "/chain.json");
    auto dg = jt::model_graph(dagm);
    CHECK(dg.num_edges() == 2);  // chain has no co-parents
}

TEST_CASE("parse and semantic failures are distinguished") {
    CHECK_THROWS_AS(jt::parse_model_text("{ not json"), jt::ParseError);
    CHECK_THROWS_AS(jt::parse_model_text("{}"), jt::ParseError);  // missing fields

    std::string wrong_version = R"({"version":"other","ordering":"sorted-scope, last-fastest",
        "variables":[{"name":"A","states":["0","1"]}],"factors":[]})";
    CHECK_THROWS_AS(jt::parse_model_text(wrong_version), jt::SemanticError);

    std::string wrong_ordering = R"({"version":"junctionc-model-1","ordering":"first-fastest",
        "variables":[{"name":"A","states":["0","1"]}],"factors":[]})";
    CHECK_THROWS_AS(jt::parse_model_text(wrong_ordering), jt::SemanticError);

    std::string bad_table = R"({"version":"junctionc-model-1","ordering":"sorted-scope, last-fastest",
        "variables":[{"name":"A","states":["0","1"]}],
        "factors":[{"scope":["A"],"table":[1,2,3]}]})";
    CHECK_THROWS_AS(jt::parse_model_text(bad_table), jt::SemanticError);

    std::string unknown_var = R"({"version":"junctionc-model-1","ordering":"sorted-scope, last-fastest",
        "variables":[{"name":"A","states":["0","1"]}],
        "factors":[{"scope":["Z"],"table":[1,2]}]})";
    CHECK_THROWS_AS(jt::parse_model_text(unknown_var), jt::SemanticError);

    std::string cyclic = R"({"version":"junctionc-model-1","ordering":"sorted-scope, last-fastest",
        "variables":[{"name":"A","states":["0","1"]},{"name":"B","states":["0","1"]}],
        "factors":[],"dag":{"edges":[["A","B"],["B","A"]]}})";
    CHECK_THROWS_AS(jt::parse_model_text(cyclic), jt::SemanticError);

    std::string zero_factor = R"({"version":"junctionc-model-1","ordering":"sorted-scope, last-fastest",
        "variables":[{"name":"A","states":["0","1"]}],
        "factors":[{"scope":["A"],"table":[0,0]}]})";
    CHECK_THROWS_AS(jt::parse_model_text(zero_factor), jt::SemanticError);
}

TEST_CASE("compile pipeline pieces cohere") {
    for (const char* name : {"/chain.json", "/fourcycle.json", "/single.json"}) {
        auto cm = jt::compile_model(jt::load_model_file(kModelsDir + name));
        CHECK(jt::is_chordal(cm.triangulation.graph).chordal);
        CHECK(cm.tree.links.size() + 1 == cm.cliques.size());
        CHECK(jt::verify_junction_property(cm.tree).holds);
        auto labels = jt::separator_multiset(cm.tree);
        REQUIRE(labels.size() == cm.separators.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            CHECK(labels[i].vars == cm.separators[i].vars);

        auto prop = jt::make_propagator(cm);
        auto joint = jt::oracle::joint_from_factors(cm.model.universe, cm.model.factors);
        for (std::size_t v = 0; v < cm.model.universe->size(); ++v) {
            auto got = prop.query_marginal(static_cast<jt::VarId>(v));
            auto want = jt::normalized(jt::oracle::oracle_marginal(
                                           joint, jt::VarSet{static_cast<jt::VarId>(v)}))
                            .table();
            CHECK(tables_close(got, want, 1e-9));
        }
    }
}

TEST_CASE("cli compile reports the chain tree") {
    auto res = run_cli("compile " + kModelsDir + "/chain.json");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("cliques: 2") != std::string::npos);
    CHECK(res.output.find("junction tree: weight 1") != std::string::npos);
    CHECK(res.output.find("fill-ins: 0") != std::string::npos);

    auto single = run_cli("compile " + kModelsDir + "/single.json");
    CHECK(single.exit_code == 0);
    CHECK(single.output.find("cliques: 1") != std::string::npos);
    CHECK(single.output.find("weight 0, cost 0") != std::string::npos);
}

TEST_CASE("cli compile --optimal reports one fill-in on the four-cycle") {
    auto res = run_cli("compile --optimal " + kModelsDir + "/fourcycle.json");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("fill-ins: 1") != std::string::npos);

    auto almond = run_cli("compile --optimal --almond --emit json " + kModelsDir + "/fourcycle.json");
    CHECK(almond.exit_code == 0);
    CHECK(almond.output.find("\"almond\"") != std::string::npos);
}

TEST_CASE("cli reports are byte-identical across runs") {
    auto a = run_cli("compile --almond " + kModelsDir + "/fourcycle.json");
    auto b = run_cli("compile --almond " + kModelsDir + "/fourcycle.json");
    CHECK(a.output == b.output);
    auto v1 = run_cli("verify --suite theorem2 --seed 7 --cases 5");
    auto v2 = run_cli("verify --suite theorem2 --seed 7 --cases 5");
    CHECK(v1.output == v2.output);
}

TEST_CASE("cli query matches the exact distribution and honors evidence") {
    auto m = jt::load_model_file(kModelsDir + "/chain.json");
    auto joint = jt::oracle::joint_from_factors(m.universe, m.factors);
    auto pa = jt::normalized(jt::oracle::oracle_marginal(joint, jt::VarSet{0})).table();

    auto res = run_cli("query " + kModelsDir + "/chain.json --marginal A");
    CHECK(res.exit_code == 0);
    char expected[128];
    std::snprintf(expected, sizeof(expected), "A: no=%.12g yes=%.12g", pa[0], pa[1]);
    CHECK(res.output.find(expected) != std::string::npos);

    auto with_ev = run_cli("query " + kModelsDir + "/chain.json --evidence B=yes --marginal B");
    CHECK(with_ev.exit_code == 0);
    CHECK(with_ev.output.find("B: no=0 yes=1") != std::string::npos);

    auto json_out = run_cli("query --emit json " + kModelsDir + "/chain.json");
    CHECK(json_out.exit_code == 0);
    CHECK(json_out.output.find("\"A\"") != std::string::npos);
}

TEST_CASE("cli exit codes follow the contract") {
    // 2: parse error
    auto bad = write_temp_model("broken", "{ this is not json");
    CHECK(run_cli("compile " + bad).exit_code == 2);
    CHECK(run_cli("compile /nonexistent/path.json").exit_code == 2);

    // 3: semantic error
    auto wrong = write_temp_model("wrong_table", R"({"version":"junctionc-model-1",
        "ordering":"sorted-scope, last-fastest",
        "variables":[{"name":"A","states":["0","1"]}],
        "factors":[{"scope":["A"],"table":[1,2,3]}]})");
    CHECK(run_cli("compile " + wrong).exit_code == 3);

    // 4: impossible evidence
    auto impossible = write_temp_model("impossible", R"({"version":"junctionc-model-1",
        "ordering":"sorted-scope, last-fastest",
        "variables":[{"name":"A","states":["0","1"]},{"name":"B","states":["0","1"]}],
        "factors":[{"scope":["A"],"table":[1,0]},{"scope":["A","B"],"table":[1,1,1,1]}]})");
    CHECK(run_cli("query " + impossible + " --evidence A=1").exit_code == 4);

    // 3: unknown variable in a query
    CHECK(run_cli("query " + kModelsDir + "/chain.json --marginal Z").exit_code == 3);

    // 0/1: verification verdicts
    auto ok = run_cli("verify --suite example1");
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("PASS") != std::string::npos);
    auto vacuous = run_cli("verify --suite theorem1 --cases 0");
    CHECK(vacuous.exit_code == 0);
}

TEST_CASE("weight-objective compilation is wired through") {
    auto res = run_cli("compile --optimal --objective weight " + kModelsDir + "/fourcycle.json");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("fill-ins: 1") != std::string::npos);
    CHECK(res.output.find("cost 16") != std::string::npos);
}

TEST_CASE("verify honors the seed environment fallback") {
    auto env_run = run_cli("verify --suite theorem2 --cases 3 < /dev/null; true");
    (void)env_run;
    RunResult a, b;
    {
        std::string cmd = "JUNCTIONC_SEED=99 " + kCli + " verify --suite theorem2 --cases 3 2>&1";
        std::array<char, 4096> buf{};
        FILE* pipe = popen(cmd.c_str(), "r");
        REQUIRE(pipe != nullptr);
        while (std::fgets(buf.data(), buf.size(), pipe)) a.output += buf.data();
        a.exit_code = WEXITSTATUS(pclose(pipe));
    }
    b = run_cli("verify --suite theorem2 --seed 99 --cases 3");
    CHECK(a.exit_code == 0);
    CHECK(a.output == b.output);
}
