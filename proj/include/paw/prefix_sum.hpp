#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace paw {

/// Fenwick tree over a growable array of nonnegative values.
/// Point update, prefix sum and prefix search are O(log n); append is
/// O(log n) without rebuilding.
template <typename T>
class PrefixSumIndex {
public:
    PrefixSumIndex() = default;

    explicit PrefixSumIndex(const std::vector<T>& values) {
        tree_.reserve(values.size());
        for (const T& v : values) push_back(v);
    }

    std::size_t size() const { return tree_.size(); }

    /// Sum of elements [0, count).
    T prefix(std::size_t count) const {
        T s{};
        for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i - 1];
        return s;
    }

    T total() const { return prefix(size()); }

    void add(std::size_t index, T delta) {
        for (std::size_t i = index + 1; i <= size(); i += i & (~i + 1)) tree_[i - 1] += delta;
    }

    /// Append one element. The new node covers [k - lowbit(k) + 1, k]
    /// (1-based), computable from existing prefix sums.
    void push_back(T value) {
        const std::size_t k = size() + 1;
        const std::size_t low = k & (~k + 1);
        tree_.push_back(value + prefix(k - 1) - prefix(k - low));
    }

    /// Smallest index i with prefix(i+1) > target, assuming target < total().
    /// With strictly positive elements this samples i with probability
    /// proportional to its value when target is uniform on [0, total).
    std::size_t find_prefix(T target) const {
        std::size_t pos = 0;
        std::size_t mask = 1;
        while ((mask << 1) <= size()) mask <<= 1;
        T remaining = target;
        for (; mask != 0; mask >>= 1) {
            const std::size_t next = pos + mask;
            if (next <= size() && tree_[next - 1] <= remaining) {
                pos = next;
                remaining -= tree_[next - 1];
            }
        }
        return pos < size() ? pos : size() - 1;
    }

private:
    std::vector<T> tree_;
};

/// Kahan-compensated accumulator for the running total of a long
/// floating-point simulation.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }

    double value() const { return sum; }
};

}  // namespace paw
