// Dual-separation oracles: a profit-scaling knapsack FPTAS and the two
// problem-specific wrappers that pick the best ratio column for the
// covering LP.
#pragma once

#include "entroround/matrix.hpp"
#include "entroround/pattern.hpp"

namespace entroround {

// Best-value subset with total size <= 1, value at least (1-eps) of the
// optimum. Ties resolve to the lexicographically smallest item sequence
// (which may include zero-profit items ahead of costlier indices).
Pattern knapsack_fptas(const Vec& y, const Vec& sizes, double eps);

struct OracleChoice {
    Pattern pattern;
    double ratio = 0.0;  // sum of prices over pattern cost; 0 for the empty pattern
};

// Better of the knapsack bin (cost 1) and the best rejection singleton
// (cost pi_i) under the price-to-cost ratio.
OracleChoice bpr_oracle(const Vec& y, const Vec& sizes, const Vec& pi, double eps);

// Best over position thresholds p_k of the knapsack restricted to items with
// p_i <= p_k, at cost p_k.
OracleChoice train_oracle(const Vec& y, const Vec& sizes, const Vec& positions, double eps);

}  // namespace entroround
