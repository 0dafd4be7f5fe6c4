#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace peeltrace {

// Union-find with path halving and union by size. Ties break towards the
// smaller index so the representative of a set is reproducible.
class DisjointSet {
public:
    explicit DisjointSet(std::uint32_t n) : parent_(n), size_(n, 1), count_(n)
    {
        std::iota(parent_.begin(), parent_.end(), 0u);
    }

    std::uint32_t find(std::uint32_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) {
            std::swap(a, b);
        }
        parent_[b] = a;
        size_[a] += size_[b];
        --count_;
        return true;
    }

    bool connected(std::uint32_t a, std::uint32_t b) { return find(a) == find(b); }

    std::uint32_t setCount() const { return count_; }
    std::uint32_t size() const { return static_cast<std::uint32_t>(parent_.size()); }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::uint32_t count_;
};

} // namespace peeltrace
