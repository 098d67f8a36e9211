#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <vector>

#include "iscreen/errors.hpp"

namespace iscreen {

/// Ordered list of distinct column indices. Order is insertion order and is
/// preserved by set operations on the left operand; equality and containment
/// are set-wise.
class IndexSet {
public:
    IndexSet() = default;
    IndexSet(std::initializer_list<int> init) : idx_(init) { check_distinct(); }
    explicit IndexSet(std::vector<int> idx) : idx_(std::move(idx)) { check_distinct(); }

    static IndexSet full(int p) {
        std::vector<int> v(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) v[static_cast<std::size_t>(j)] = j;
        return IndexSet(std::move(v));
    }

    int size() const { return static_cast<int>(idx_.size()); }
    bool empty() const { return idx_.empty(); }
    int operator[](int i) const { return idx_[static_cast<std::size_t>(i)]; }
    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }
    const std::vector<int>& indices() const { return idx_; }

    bool contains(int j) const {
        return std::find(idx_.begin(), idx_.end(), j) != idx_.end();
    }

    /// Throws if any index falls outside [0, p).
    void check_bounds(int p) const {
        for (int j : idx_)
            if (j < 0 || j >= p)
                throw InvalidConfig("index " + std::to_string(j) + " out of range [0, " +
                                    std::to_string(p) + ")");
    }

    /// this ∪ other, new members appended in other's order.
    IndexSet set_union(const IndexSet& other) const {
        std::vector<int> out = idx_;
        for (int j : other.idx_)
            if (!contains(j)) out.push_back(j);
        return IndexSet(std::move(out));
    }

    /// this − other, order preserved.
    IndexSet set_minus(const IndexSet& other) const {
        std::vector<int> out;
        for (int j : idx_)
            if (!other.contains(j)) out.push_back(j);
        return IndexSet(std::move(out));
    }

    /// this ∩ other, in this's order.
    IndexSet set_intersect(const IndexSet& other) const {
        std::vector<int> out;
        for (int j : idx_)
            if (other.contains(j)) out.push_back(j);
        return IndexSet(std::move(out));
    }

    /// {0..p−1} − this, ascending.
    IndexSet complement(int p) const {
        std::vector<char> in(static_cast<std::size_t>(p), 0);
        for (int j : idx_) in[static_cast<std::size_t>(j)] = 1;
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(p) - idx_.size());
        for (int j = 0; j < p; ++j)
            if (!in[static_cast<std::size_t>(j)]) out.push_back(j);
        return IndexSet(std::move(out));
    }

    bool is_subset_of(const IndexSet& other) const {
        for (int j : idx_)
            if (!other.contains(j)) return false;
        return true;
    }

    std::vector<int> sorted() const {
        std::vector<int> s = idx_;
        std::sort(s.begin(), s.end());
        return s;
    }

    /// Set equality (order-insensitive).
    friend bool operator==(const IndexSet& a, const IndexSet& b) {
        return a.sorted() == b.sorted();
    }
    friend bool operator!=(const IndexSet& a, const IndexSet& b) { return !(a == b); }

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(idx_[i]);
        }
        return s + "}";
    }

private:
    std::vector<int> idx_;

    void check_distinct() const {
        std::vector<int> s = idx_;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw InvalidConfig("duplicate index in index set");
    }
};

} // namespace iscreen
