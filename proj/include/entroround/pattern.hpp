// Pattern columns shared by the oracles and the covering LP.
#pragma once

#include <stdexcept>
#include <vector>

#include "entroround/matrix.hpp"

namespace entroround {

// A feasible column: sorted item indices plus a positive cost in (0,1].
struct Pattern {
    std::vector<int> items;
    double cost = 1.0;

    bool operator==(const Pattern& other) const {
        return cost == other.cost && items == other.items;
    }
};

// Order used for tie-breaking between candidate patterns: lexicographic on
// the sorted item sequence, then smaller cost.
inline bool pattern_less(const Pattern& a, const Pattern& b) {
    if (a.items != b.items) return a.items < b.items;
    return a.cost < b.cost;
}

inline double sum_prices(const Vec& y, const std::vector<int>& items) {
    double s = 0.0;
    for (int i : items) s += y[static_cast<size_t>(i)];
    return s;
}

inline void require_sorted_items(const Pattern& p, int n) {
    for (size_t k = 0; k < p.items.size(); ++k) {
        if (p.items[k] < 0 || p.items[k] >= n)
            throw std::invalid_argument("pattern: item index out of range");
        if (k > 0 && p.items[k] <= p.items[k - 1])
            throw std::invalid_argument("pattern: items must be sorted and distinct");
    }
}

}  // namespace entroround
