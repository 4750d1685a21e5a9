#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace spanseq {

// Disjoint sets with path halving and union by size.
template <std::unsigned_integral Index = std::uint32_t>
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), Index{0});
    }

    Index find(Index x) noexcept {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns false when a and b were already joined.
    bool unite(Index a, Index b) noexcept {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    bool connected(Index a, Index b) noexcept { return find(a) == find(b); }

    std::size_t set_size(Index x) noexcept { return size_[find(x)]; }

    std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector<Index> parent_;
    std::vector<std::size_t> size_;
};

}  // namespace spanseq
