#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <vector>

namespace junctionc {

using VarId = int;

// Sorted set of variable ids. The sorted order doubles as the axis order of
// potential tables (last variable varies fastest), so every consumer of a
// scope sees the same layout.
class VarSet {
public:
    VarSet() = default;
    VarSet(std::initializer_list<VarId> ids) : ids_(ids) { normalize(); }
    explicit VarSet(std::vector<VarId> ids) : ids_(std::move(ids)) { normalize(); }

    bool contains(VarId v) const {
        return std::binary_search(ids_.begin(), ids_.end(), v);
    }

    bool subset_of(const VarSet& other) const {
        return std::includes(other.ids_.begin(), other.ids_.end(),
                             ids_.begin(), ids_.end());
    }

    bool strict_subset_of(const VarSet& other) const {
        return ids_.size() < other.ids_.size() && subset_of(other);
    }

    bool intersects(const VarSet& other) const {
        auto a = ids_.begin();
        auto b = other.ids_.begin();
        while (a != ids_.end() && b != other.ids_.end()) {
            if (*a < *b) ++a;
            else if (*b < *a) ++b;
            else return true;
        }
        return false;
    }

    void insert(VarId v) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
        if (it == ids_.end() || *it != v) ids_.insert(it, v);
    }

    void erase(VarId v) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
        if (it != ids_.end() && *it == v) ids_.erase(it);
    }

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    VarId operator[](std::size_t i) const { return ids_[i]; }

    // Position of v within the sorted ids; size() when absent.
    std::size_t index_of(VarId v) const {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
        return (it != ids_.end() && *it == v)
                   ? static_cast<std::size_t>(it - ids_.begin())
                   : ids_.size();
    }

    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }
    const std::vector<VarId>& ids() const { return ids_; }

    friend bool operator==(const VarSet&, const VarSet&) = default;
    friend auto operator<=>(const VarSet&, const VarSet&) = default;

private:
    void normalize() {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    }

    std::vector<VarId> ids_;
};

inline VarSet set_union(const VarSet& a, const VarSet& b) {
    std::vector<VarId> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return VarSet(std::move(out));
}

inline VarSet set_intersection(const VarSet& a, const VarSet& b) {
    std::vector<VarId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return VarSet(std::move(out));
}

inline VarSet set_difference(const VarSet& a, const VarSet& b) {
    std::vector<VarId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return VarSet(std::move(out));
}

// Raw id form, e.g. "{0,2,5}". Name-aware printing lives with Universe.
inline std::ostream& operator<<(std::ostream& os, const VarSet& s) {
    os << '{';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    return os << '}';
}

}  // namespace junctionc
