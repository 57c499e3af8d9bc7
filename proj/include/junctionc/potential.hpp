#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "universe.hpp"

namespace junctionc {

// Strides of a sorted scope under the fixed table layout: the last (highest
// id) variable varies fastest.
inline std::vector<std::uint64_t> scope_strides(const Universe& u, const VarSet& scope) {
    std::vector<std::uint64_t> strides(scope.size());
    std::uint64_t s = 1;
    for (std::size_t i = scope.size(); i-- > 0;) {
        strides[i] = s;
        s *= static_cast<std::uint64_t>(u.cardinality(scope[i]));
    }
    return strides;
}

// map[i] = linear index of configuration i projected from `scope` onto `sub`.
// Requires sub to be contained in scope.
inline std::vector<std::uint64_t> projection_index_map(const Universe& u,
                                                       const VarSet& scope,
                                                       const VarSet& sub) {
    const std::uint64_t total = u.table_size(scope);
    auto sub_strides = scope_strides(u, sub);

    // Per-position stride contribution in the sub table (0 if absent there).
    std::vector<std::uint64_t> contrib(scope.size(), 0);
    std::vector<int> cards(scope.size());
    for (std::size_t pos = 0; pos < scope.size(); ++pos) {
        cards[pos] = u.cardinality(scope[pos]);
        std::size_t k = sub.index_of(scope[pos]);
        if (k < sub.size()) contrib[pos] = sub_strides[k];
    }

    std::vector<std::uint64_t> map(total);
    std::vector<int> state(scope.size(), 0);
    std::uint64_t sub_index = 0;
    for (std::uint64_t i = 0; i < total; ++i) {
        map[i] = sub_index;
        for (std::size_t pos = scope.size(); pos-- > 0;) {
            ++state[pos];
            sub_index += contrib[pos];
            if (state[pos] < cards[pos]) break;
            sub_index -= contrib[pos] * static_cast<std::uint64_t>(state[pos]);
            state[pos] = 0;
        }
    }
    return map;
}

// Decodes a linear index of `scope` into "(A=0, B=1)" form.
inline std::string format_config(const Universe& u, const VarSet& scope, std::uint64_t index) {
    auto strides = scope_strides(u, scope);
    std::ostringstream os;
    os << '(';
    for (std::size_t pos = 0; pos < scope.size(); ++pos) {
        if (pos) os << ", ";
        auto state = (index / strides[pos]) % static_cast<std::uint64_t>(u.cardinality(scope[pos]));
        os << u.name(scope[pos]) << '=' << state;
    }
    os << ')';
    return os.str();
}

// Dense nonnegative real table over the configurations of a sorted scope.
class Potential {
public:
    Potential(UniversePtr universe, VarSet scope, std::vector<double> table)
        : universe_(std::move(universe)), scope_(std::move(scope)), table_(std::move(table)) {
        const std::uint64_t expected = universe_->table_size(scope_);
        if (table_.size() != expected)
            throw SemanticError("potential table has " + std::to_string(table_.size()) +
                                " entries, scope requires " + std::to_string(expected));
        for (double x : table_)
            if (!(x >= 0.0) || !std::isfinite(x))
                throw SemanticError("potential entries must be finite and nonnegative");
    }

    static Potential neutral(UniversePtr universe, VarSet scope) {
        std::vector<double> ones(universe->table_size(scope), 1.0);
        return Potential(std::move(universe), std::move(scope), std::move(ones));
    }

    const VarSet& scope() const { return scope_; }
    const std::vector<double>& table() const { return table_; }
    std::vector<double>& table() { return table_; }
    std::uint64_t size() const { return table_.size(); }
    const UniversePtr& universe() const { return universe_; }

    double sum() const {
        double s = 0.0;
        for (double x : table_) s += x;
        return s;
    }

    bool all_zero() const {
        for (double x : table_)
            if (x != 0.0) return false;
        return true;
    }

private:
    UniversePtr universe_;
    VarSet scope_;
    std::vector<double> table_;
};

// Pointwise product with q broadcast over p's configurations.
inline Potential multiply(const Potential& p, const Potential& q) {
    if (!q.scope().subset_of(p.scope()))
        throw std::invalid_argument("multiply: q's scope must be contained in p's scope");
    auto map = projection_index_map(*p.universe(), p.scope(), q.scope());
    std::vector<double> out(p.table());
    for (std::uint64_t i = 0; i < out.size(); ++i) out[i] *= q.table()[map[i]];
    return Potential(p.universe(), p.scope(), std::move(out));
}

// Sum out every variable not in `target`.
inline Potential marginalize(const Potential& p, const VarSet& target) {
    if (!target.subset_of(p.scope()))
        throw std::invalid_argument("marginalize: target must be contained in the scope");
    auto map = projection_index_map(*p.universe(), p.scope(), target);
    std::vector<double> out(p.universe()->table_size(target), 0.0);
    for (std::uint64_t i = 0; i < p.size(); ++i) out[map[i]] += p.table()[i];
    return Potential(p.universe(), target, std::move(out));
}

// Pointwise quotient over a shared scope with the convention 0/0 = 0.
// Positive mass over a zero denominator means a configuration that was
// ruled out acquired mass, which is a model inconsistency.
inline Potential divide(const Potential& num, const Potential& den) {
    if (num.scope() != den.scope())
        throw std::invalid_argument("divide: scopes must be identical");
    std::vector<double> out(num.size());
    for (std::uint64_t i = 0; i < num.size(); ++i) {
        double n = num.table()[i];
        double d = den.table()[i];
        if (d == 0.0) {
            if (n != 0.0)
                throw InconsistencyError(
                    "division of positive mass by zero at configuration " +
                        format_config(*num.universe(), num.scope(), i),
                    static_cast<std::size_t>(i));
            out[i] = 0.0;
        } else {
            out[i] = n / d;
        }
    }
    return Potential(num.universe(), num.scope(), std::move(out));
}

// Scales the table to sum 1.
inline Potential normalized(const Potential& p) {
    double s = p.sum();
    if (s <= 0.0) throw Error("cannot normalize an all-zero table");
    std::vector<double> out(p.table());
    for (double& x : out) x /= s;
    return Potential(p.universe(), p.scope(), std::move(out));
}

}  // namespace junctionc
