#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "almond.hpp"
#include "junction.hpp"
#include "potential.hpp"

namespace junctionc {

// Observations: hard findings clamp a variable to one state; soft findings
// scale its states by a nonnegative weight vector.
struct Evidence {
    std::map<VarId, int> hard;
    std::map<VarId, std::vector<double>> soft;

    void observe(VarId v, int state) { hard[v] = state; }
    void add_soft(VarId v, std::vector<double> weights) { soft[v] = std::move(weights); }
    bool empty() const { return hard.empty() && soft.empty(); }

    void validate(const Universe& u) const {
        for (auto [v, state] : hard) {
            if (v < 0 || static_cast<std::size_t>(v) >= u.size())
                throw SemanticError("evidence names an unknown variable id " + std::to_string(v));
            if (state < 0 || state >= u.cardinality(v))
                throw SemanticError("evidence state " + std::to_string(state) +
                                    " out of range for variable " + u.name(v));
        }
        for (const auto& [v, weights] : soft) {
            if (v < 0 || static_cast<std::size_t>(v) >= u.size())
                throw SemanticError("evidence names an unknown variable id " + std::to_string(v));
            if (weights.size() != static_cast<std::size_t>(u.cardinality(v)))
                throw SemanticError("soft finding for " + u.name(v) + " has wrong length");
            bool any = false;
            for (double w : weights) {
                if (w < 0.0) throw SemanticError("soft findings must be nonnegative");
                any = any || w > 0.0;
            }
            if (!any) throw SemanticError("soft finding for " + u.name(v) + " is all zero");
        }
    }
};

// Directed two-pass schedule over a tree: every link carries exactly one
// message per direction, children fire before their parent (collect) and
// the parent before its children (distribute).
struct Schedule {
    int root = -1;
    std::vector<int> parent;                     // -1 at root
    std::vector<std::pair<int, int>> messages;   // (from, to), collect then distribute
};

inline Schedule make_schedule(const std::vector<std::vector<int>>& adjacency, int root) {
    const std::size_t n = adjacency.size();
    Schedule s;
    s.root = root;
    s.parent.assign(n, -2);
    s.parent[root] = -1;

    // preorder with ascending neighbour ids
    std::vector<int> preorder;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        preorder.push_back(cur);
        auto kids = adjacency[cur];
        std::sort(kids.rbegin(), kids.rend());
        for (int nb : kids)
            if (s.parent[nb] == -2) {
                s.parent[nb] = cur;
                stack.push_back(nb);
            }
    }
    if (preorder.size() != n) throw Error("make_schedule: tree is disconnected");

    for (auto it = preorder.rbegin(); it != preorder.rend(); ++it)
        if (*it != root) s.messages.emplace_back(*it, s.parent[*it]);
    for (int node : preorder)
        if (node != root) s.messages.emplace_back(s.parent[node], node);
    return s;
}

struct OperationCounters {
    std::size_t projections = 0;
    std::size_t combinations = 0;
    std::size_t divisions = 0;
    std::uint64_t projection_cells = 0;
};

namespace detail {

// Root at the clique with the largest table, lowest id on ties. The result
// does not depend on the root; this is a determinism rule only.
inline int pick_root(const std::vector<Clique>& cliques) {
    int best = 0;
    for (std::size_t i = 1; i < cliques.size(); ++i)
        if (cliques[i].table_size > cliques[best].table_size) best = static_cast<int>(i);
    return best;
}

inline int lowest_containing_clique(const std::vector<Clique>& cliques, const VarSet& scope) {
    for (const auto& c : cliques)
        if (scope.subset_of(c.vars)) return c.id;
    return -1;
}

inline Potential evidence_vector(const UniversePtr& u, VarId v, const Evidence& ev) {
    auto card = static_cast<std::size_t>(u->cardinality(v));
    std::vector<double> w(card, 1.0);
    if (auto it = ev.hard.find(v); it != ev.hard.end()) {
        std::fill(w.begin(), w.end(), 0.0);
        w[static_cast<std::size_t>(it->second)] = 1.0;
    }
    if (auto it = ev.soft.find(v); it != ev.soft.end())
        for (std::size_t i = 0; i < card; ++i) w[i] *= it->second[i];
    return Potential(u, VarSet{v}, std::move(w));
}

}  // namespace detail

// Two-pass separator propagation over a junction tree. After propagate(),
// every clique and separator table holds the (possibly non-normalized)
// marginal of the joint product onto its scope.
class JunctionTreePropagator {
public:
    explicit JunctionTreePropagator(JunctionTree tree) : tree_(std::move(tree)) {
        std::vector<std::vector<int>> adj(tree_.cliques.size());
        for (const auto& l : tree_.links) {
            adj[l.a].push_back(l.b);
            adj[l.b].push_back(l.a);
        }
        schedule_ = make_schedule(adj, detail::pick_root(tree_.cliques));
        link_index_.assign(tree_.cliques.size(), std::vector<int>(tree_.cliques.size(), -1));
        for (std::size_t i = 0; i < tree_.links.size(); ++i) {
            link_index_[tree_.links[i].a][tree_.links[i].b] = static_cast<int>(i);
            link_index_[tree_.links[i].b][tree_.links[i].a] = static_cast<int>(i);
        }
        assign_factors({});
    }

    // Each factor multiplies into the lowest-id clique containing its scope;
    // untouched cliques and all separators start as neutral (all ones).
    void assign_factors(const std::vector<Potential>& factors) {
        clique_pot_.clear();
        for (const auto& c : tree_.cliques)
            clique_pot_.push_back(Potential::neutral(tree_.universe, c.vars));
        for (const auto& f : factors) {
            int cid = detail::lowest_containing_clique(tree_.cliques, f.scope());
            if (cid < 0)
                throw Error("assign_factors: factor scope " +
                            format_varset(*tree_.universe, f.scope()) +
                            " is not covered by any clique (compilation bug)");
            clique_pot_[cid] = multiply(clique_pot_[cid], f);
        }
        sep_pot_.clear();
        for (const auto& l : tree_.links)
            sep_pot_.push_back(Potential::neutral(tree_.universe, l.separator.vars));
        calibrated_ = false;
        counters_ = {};
    }

    void apply_evidence(const Evidence& ev) {
        ev.validate(*tree_.universe);
        for (auto [v, state] : ev.hard) multiply_in(detail::evidence_vector(tree_.universe, v, ev));
        for (const auto& [v, w] : ev.soft)
            if (!ev.hard.count(v)) multiply_in(detail::evidence_vector(tree_.universe, v, ev));
        calibrated_ = false;
    }

    void propagate() {
        const std::size_t half = schedule_.messages.size() / 2;
        for (std::size_t m = 0; m < schedule_.messages.size(); ++m) {
            auto [from, to] = schedule_.messages[m];
            pass_message(from, to);
            if (m + 1 == half && clique_pot_[schedule_.root].all_zero())
                throw ImpossibleEvidenceError("impossible evidence: joint mass is zero");
        }
        if (tree_.links.empty() && clique_pot_[schedule_.root].all_zero())
            throw ImpossibleEvidenceError("impossible evidence: joint mass is zero");
        calibrated_ = true;
    }

    bool calibrated() const { return calibrated_; }
    const JunctionTree& tree() const { return tree_; }
    const Schedule& schedule() const { return schedule_; }
    const OperationCounters& counters() const { return counters_; }
    const Potential& clique_potential(int cid) const { return clique_pot_[cid]; }
    const Potential& separator_potential(int link_index) const { return sep_pot_[link_index]; }

    // Marginal of the calibrated tree onto `target`, read from the lowest-id
    // covering clique.
    Potential marginal_on(const VarSet& target) const {
        require_calibrated();
        int cid = detail::lowest_containing_clique(tree_.cliques, target);
        if (cid < 0)
            throw std::invalid_argument("marginal_on: no clique covers " +
                                        format_varset(*tree_.universe, target));
        return marginalize(clique_pot_[cid], target);
    }

    std::vector<double> query_marginal(VarId v) const {
        require_calibrated();
        if (v < 0 || static_cast<std::size_t>(v) >= tree_.universe->size())
            throw SemanticError("query_marginal: unknown variable id " + std::to_string(v));
        return normalized(marginal_on(VarSet{v})).table();
    }

private:
    void require_calibrated() const {
        if (!calibrated_) throw Error("tree is not calibrated; run propagate() first");
    }

    void multiply_in(const Potential& finding) {
        int cid = detail::lowest_containing_clique(tree_.cliques, finding.scope());
        clique_pot_[cid] = multiply(clique_pot_[cid], finding);
    }

    // phi'_S = marginal of the source clique onto S; the target clique is
    // scaled by phi'_S / phi_S and S stores phi'_S.
    void pass_message(int from, int to) {
        int li = link_index_[from][to];
        const VarSet& sep = tree_.links[li].separator.vars;
        counters_.projection_cells += clique_pot_[from].size();
        ++counters_.projections;
        Potential fresh = marginalize(clique_pot_[from], sep);
        ++counters_.divisions;
        Potential ratio = divide(fresh, sep_pot_[li]);
        ++counters_.combinations;
        clique_pot_[to] = multiply(clique_pot_[to], ratio);
        sep_pot_[li] = std::move(fresh);
    }

    JunctionTree tree_;
    Schedule schedule_;
    std::vector<std::vector<int>> link_index_;
    std::vector<Potential> clique_pot_;
    std::vector<Potential> sep_pot_;
    OperationCounters counters_;
    bool calibrated_ = false;
};

// Two-pass propagation over an Almond tree. Clique nodes fold incoming
// messages into their working table; a separator node stores the tables
// received from its children (degree - 1 of them) and emits, toward each
// neighbour, the combination of the tables received from all the others.
class AlmondPropagator {
public:
    explicit AlmondPropagator(AlmondTree tree) : tree_(std::move(tree)) {
        int root = 0;
        for (int i = 1; i < tree_.num_cliques; ++i)
            if (tree_.nodes[i].table_size > tree_.nodes[root].table_size) root = i;
        schedule_ = make_schedule(tree_.adjacency, root);
        assign_factors({});
    }

    void assign_factors(const std::vector<Potential>& factors) {
        initial_.clear();
        for (int i = 0; i < tree_.num_cliques; ++i)
            initial_.push_back(Potential::neutral(tree_.universe, tree_.nodes[i].vars));
        for (const auto& f : factors) {
            int nid = containing_clique(f.scope());
            if (nid < 0)
                throw Error("assign_factors: factor scope " +
                            format_varset(*tree_.universe, f.scope()) +
                            " is not covered by any clique (compilation bug)");
            initial_[nid] = multiply(initial_[nid], f);
        }
        calibrated_ = false;
        counters_ = {};
    }

    void apply_evidence(const Evidence& ev) {
        ev.validate(*tree_.universe);
        for (auto [v, state] : ev.hard) {
            auto vec = detail::evidence_vector(tree_.universe, v, ev);
            initial_[containing_clique(vec.scope())] =
                multiply(initial_[containing_clique(vec.scope())], vec);
        }
        for (const auto& [v, w] : ev.soft)
            if (!ev.hard.count(v)) {
                auto vec = detail::evidence_vector(tree_.universe, v, ev);
                initial_[containing_clique(vec.scope())] =
                    multiply(initial_[containing_clique(vec.scope())], vec);
            }
        calibrated_ = false;
    }

    void propagate() {
        counters_ = {};
        belief_ = initial_;
        for (std::size_t n = belief_.size(); n < tree_.nodes.size(); ++n)
            belief_.push_back(Potential::neutral(tree_.universe, tree_.nodes[n].vars));
        up_msg_.assign(tree_.nodes.size(), std::nullopt);
        down_msg_.assign(tree_.nodes.size(), std::nullopt);
        child_msgs_.assign(tree_.nodes.size(), {});

        const std::size_t half = schedule_.messages.size() / 2;
        for (std::size_t m = 0; m < half; ++m) {
            auto [from, to] = schedule_.messages[m];
            Potential msg = outgoing(from, to);
            up_msg_[from] = msg;
            deliver(msg, from, to);
        }
        if (belief_[schedule_.root].all_zero())
            throw ImpossibleEvidenceError("impossible evidence: joint mass is zero");
        for (std::size_t m = half; m < schedule_.messages.size(); ++m) {
            auto [from, to] = schedule_.messages[m];
            Potential msg = outgoing(from, to);
            deliver(msg, from, to);
        }

        // Separator beliefs: combination of everything received (no
        // further projections needed).
        for (std::size_t n = 0; n < tree_.nodes.size(); ++n) {
            if (tree_.nodes[n].kind != AlmondNodeKind::separator) continue;
            Potential b = Potential::neutral(tree_.universe, tree_.nodes[n].vars);
            for (const auto& [child, msg] : child_msgs_[n]) {
                ++counters_.combinations;
                b = multiply(b, msg);
            }
            ++counters_.combinations;
            b = multiply(b, *down_msg_[n]);
            belief_[n] = std::move(b);
        }
        calibrated_ = true;
    }

    bool calibrated() const { return calibrated_; }
    const AlmondTree& tree() const { return tree_; }
    const Schedule& schedule() const { return schedule_; }
    const OperationCounters& counters() const { return counters_; }

    const Potential& belief(int node_id) const {
        require_calibrated();
        return belief_[node_id];
    }

    // Tables a separator node kept across the two passes (its child
    // messages); the parent table is only passed through.
    std::size_t stored_tables(int node_id) const {
        require_calibrated();
        return child_msgs_[node_id].size();
    }

    Potential marginal_on(const VarSet& target) const {
        require_calibrated();
        int nid = containing_clique(target);
        if (nid < 0)
            throw std::invalid_argument("marginal_on: no clique covers " +
                                        format_varset(*tree_.universe, target));
        return marginalize(belief_[nid], target);
    }

    std::vector<double> query_marginal(VarId v) const {
        require_calibrated();
        if (v < 0 || static_cast<std::size_t>(v) >= tree_.universe->size())
            throw SemanticError("query_marginal: unknown variable id " + std::to_string(v));
        return normalized(marginal_on(VarSet{v})).table();
    }

private:
    void require_calibrated() const {
        if (!calibrated_) throw Error("tree is not calibrated; run propagate() first");
    }

    int containing_clique(const VarSet& scope) const {
        for (int i = 0; i < tree_.num_cliques; ++i)
            if (scope.subset_of(tree_.nodes[i].vars)) return i;
        return -1;
    }

    bool is_separator(int node) const {
        return tree_.nodes[node].kind == AlmondNodeKind::separator;
    }

    Potential project_to(const Potential& p, const VarSet& target) {
        if (p.scope() == target) return p;
        ++counters_.projections;
        counters_.projection_cells += p.size();
        return marginalize(p, target);
    }

    // Message from `from` toward `to` given everything `from` has received
    // from its other neighbours.
    Potential outgoing(int from, int to) {
        const VarSet& from_vars = tree_.nodes[from].vars;
        const VarSet& to_vars = tree_.nodes[to].vars;
        if (!is_separator(from)) {
            // Clique: working table already folds in the child messages;
            // divide the target child's own message back out on the way down.
            if (to == schedule_.parent[from]) return project_to(belief_[from], to_vars);
            Potential m = project_to(belief_[from], to_vars);
            ++counters_.divisions;
            return divide(m, *up_msg_[to]);
        }
        // Separator: combine the stored tables from all neighbours but `to`
        // (ascending id), plus the parent table when sending downward.
        Potential m = Potential::neutral(tree_.universe, from_vars);
        for (const auto& [child, msg] : child_msgs_[from]) {
            if (child == to) continue;
            ++counters_.combinations;
            m = multiply(m, msg);
        }
        if (schedule_.parent[from] != to && down_msg_[from]) {
            ++counters_.combinations;
            m = multiply(m, *down_msg_[from]);
        }
        if (to_vars.strict_subset_of(from_vars)) return project_to(m, to_vars);
        return m;
    }

    void deliver(Potential msg, int from, int to) {
        if (!is_separator(to)) {
            ++counters_.combinations;
            belief_[to] = multiply(belief_[to], msg);
        } else if (to == schedule_.parent[from]) {
            child_msgs_[to].emplace_back(from, std::move(msg));
        } else {
            down_msg_[to] = std::move(msg);
        }
    }

    AlmondTree tree_;
    Schedule schedule_;
    std::vector<Potential> initial_;
    std::vector<Potential> belief_;
    std::vector<std::optional<Potential>> up_msg_;
    std::vector<std::optional<Potential>> down_msg_;
    std::vector<std::vector<std::pair<int, Potential>>> child_msgs_;
    OperationCounters counters_;
    bool calibrated_ = false;
};

}  // namespace junctionc
