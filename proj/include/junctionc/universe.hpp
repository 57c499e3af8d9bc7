#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "varset.hpp"

namespace junctionc {

struct Variable {
    VarId id = -1;
    std::string name;
    int cardinality = 0;  // number of discrete states, >= 1
};

// Ordered collection of discrete variables. Ids are dense 0..n-1 in
// declaration order. Immutable once built and shared via UniversePtr.
class Universe {
public:
    Universe() = default;

    VarId add_variable(std::string name, int cardinality) {
        if (cardinality < 1)
            throw SemanticError("variable '" + name + "': cardinality must be >= 1");
        if (find(name) >= 0)
            throw SemanticError("duplicate variable name '" + name + "'");
        VarId id = static_cast<VarId>(vars_.size());
        vars_.push_back(Variable{id, std::move(name), cardinality});
        return id;
    }

    std::size_t size() const { return vars_.size(); }

    const Variable& var(VarId v) const { return vars_.at(static_cast<std::size_t>(v)); }
    int cardinality(VarId v) const { return var(v).cardinality; }
    const std::string& name(VarId v) const { return var(v).name; }
    const std::vector<Variable>& variables() const { return vars_; }

    // Id for `name`, or -1 when absent.
    VarId find(const std::string& name) const {
        for (const auto& v : vars_)
            if (v.name == name) return v.id;
        return -1;
    }

    VarSet all_vars() const {
        std::vector<VarId> ids(vars_.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<VarId>(i);
        return VarSet(std::move(ids));
    }

    // Product of cardinalities over `vars`, checked against 64-bit overflow.
    std::uint64_t table_size(const VarSet& vars) const {
        std::uint64_t n = 1;
        for (VarId v : vars) {
            auto c = static_cast<std::uint64_t>(cardinality(v));
            if (n > std::numeric_limits<std::uint64_t>::max() / c)
                throw ModelTooLargeError("model too large: state-space product exceeds 64-bit range");
            n *= c;
        }
        return n;
    }

private:
    std::vector<Variable> vars_;
};

using UniversePtr = std::shared_ptr<const Universe>;

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    if (a > std::numeric_limits<std::uint64_t>::max() - b)
        throw ModelTooLargeError("model too large: 64-bit sum overflow");
    return a + b;
}

// "{A,B,C}" using variable names.
inline std::string format_varset(const Universe& u, const VarSet& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ',';
        out += u.name(s[i]);
    }
    out += '}';
    return out;
}

}  // namespace junctionc
