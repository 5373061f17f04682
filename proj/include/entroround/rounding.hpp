// Rounding engine: turns a fractional vector into a binary one while keeping
// every tracked row within a slack that degrades only logarithmically, soft
// rows within entropy-weighted caps, and the expectation of the output equal
// to the input.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entroround/config.hpp"
#include "entroround/matrix.hpp"
#include "entroround/rng.hpp"

namespace entroround {

// Tracked rows `a` carry hard per-row slacks delta. Soft rows `b` (entries in
// [-1,1]) carry entropy weights mu with sum <= 1. The optional objective row
// c (entries in [-1,1]) is folded into `b` by append_objective_row. x lives
// in [0,1]^m.
struct RoundingInstance {
    DenseMatrix a;
    Vec delta;
    DenseMatrix b;
    Vec mu;
    Vec c;
    Vec x;
    bool objective_appended = false;

    int cols() const;
    int total_rows() const { return a.rows + b.rows; }
    void validate() const;
};

// Moves c into the soft block at weight 1/2, halving existing weights.
RoundingInstance append_objective_row(const RoundingInstance& inst);

struct ReduceOutcome {
    RoundingInstance inst;
    bool reduced = false;   // false: numerical failure, input returned unchanged
    std::string note;
};

// Pushes x along null-space directions of [a; b] restricted to fractional
// coordinates until at most total_rows() of them remain strictly inside
// (0,1). Row images are preserved within 1e-9.
ReduceOutcome reduce_to_basic(const RoundingInstance& inst);

// Fixed-point dyadic representation: value(j) = grid[j] / 2^bits.
struct DyadicVector {
    int bits = 0;
    std::vector<std::uint32_t> grid;

    double value(int j) const {
        return static_cast<double>(grid[static_cast<size_t>(j)]) /
               static_cast<double>(1u << bits);
    }
    Vec reconstruct() const;
    // Columns whose 2^{-k} bit is set, k in [1, bits].
    std::vector<int> plane(int k) const;
};

// Randomized snap to the 2^{-bits} grid; each coordinate rounds up with
// probability equal to its residual fraction, so expectation is preserved.
DyadicVector dyadic_snap(const Vec& x, int bits, Xoshiro256& rng);
DyadicVector dyadic_snap(const Vec& x, int bits, std::uint64_t seed);

enum class RoundingBackend { Exhaustive, SdpWalk };

struct RoundingReport {
    Vec y;
    Vec a_drift;              // |A_i x - A_i y|, recomputed from scratch
    Vec b_drift;
    double objective_drift = 0.0;
    std::vector<int> retries_per_bit;          // fallbacks or goodness retries
    std::vector<std::vector<int>> plane_sizes; // per bit level, sizes of J per step
    std::string backend;
    bool success = false;
    std::string note;
    double factor_raw = 0.0;       // log2(min(2n, 2m))
    double factor_adjusted = 0.0;  // log2(min(4n, 4m))
    bool within_raw = true;        // every tracked row within factor * delta_i
    bool within_adjusted = true;
};

// Rounds instance.x bit by bit, least significant plane first. The exhaustive
// backend clears each plane with half-colorings (signature buckets, falling
// back to direct search on starved buckets); planes wider than the
// enumeration cap are handed to the walk backend. The walk backend colors a
// whole plane at once and retries until the coloring passes goodness_check.
RoundingReport entropy_round(const RoundingInstance& inst, RoundingBackend backend,
                             const Config& cfg, std::uint64_t seed);

// Full-coloring quality gate: tracked rows within
// cprime * sqrt(log2 n) * sqrt(log2 m) * delta_i, soft rows within
// cprime * log2(2/mu_i) / sqrt(mu_i). n is the instance row count, m the
// instance column count (both floored at 2).
bool goodness_check(const PartialColoring& chi, const DenseMatrix& a, const Vec& delta,
                    const DenseMatrix& b, const Vec& mu, double cprime, int n_total,
                    int m_total);

struct TailRow {
    double lambda = 0.0;
    long exceed = 0;
    long total = 0;
    double freq = 0.0;
    double bound = 0.0;  // 2 e^{-lambda^2/2}
};

// Exceedance of |A_i x - A_i y| over lambda * sqrt(factor_adjusted) * delta_i
// pooled across reports, against the 2 e^{-lambda^2/2} curve.
std::vector<TailRow> tail_report(const std::vector<RoundingReport>& reports,
                                 const RoundingInstance& inst,
                                 const std::vector<double>& lambda_grid);

}  // namespace entroround
