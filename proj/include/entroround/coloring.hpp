// Half-coloring search: signature bucketing, farthest pairs, and the
// pigeonhole / direct-search construction of partial colorings with small
// discrepancy on every row.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "entroround/matrix.hpp"

namespace entroround {

// Nearest integer with ties broken downward: 0.5 -> 0, -0.5 -> -1.
inline std::int64_t nearest_int_tie_down(double z) {
    return static_cast<std::int64_t>(std::ceil(z - 0.5));
}

// Per-row bucket keys round_half_down(A_i chi / (2 delta_i)).
SignatureVector rounded_signature(const DenseMatrix& a, const PartialColoring& chi,
                                  const Vec& delta);

struct FarthestPair {
    std::uint32_t first = 0;   // coloring bitmask, bit j set <=> chi_j = +1
    std::uint32_t second = 0;
    int distance = 0;          // Hamming distance
    bool met_threshold = false;  // distance >= m/2
};

// Pair of colorings in one bucket at large Hamming distance. Exhaustive scan
// up to 4096 members; beyond that, seeded pair sampling plus alternating
// one-sided improvement. Buckets of size >= 2^{0.8 m} always contain a pair
// at distance >= m/2 (isoperimetry), so met_threshold is expected to hold.
FarthestPair farthest_pair(const std::vector<std::uint32_t>& bucket, int m);

struct NoLargeBucket : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoValidColoring : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ColoringMode { Pigeonhole, Direct };

// Partial coloring with |A_i chi| <= delta_i on every row and support at
// least ceil(m/2).
//
// Pigeonhole mode buckets all 2^m full colorings by signature, requires some
// bucket of size >= ceil(2^{0.8 m}) (else NoLargeBucket), and returns the
// half-difference of a farthest pair within such a bucket. Direct mode
// enumerates {-1,0,+1}^m in decreasing support order and returns the first
// pattern meeting every row bound (else NoValidColoring).
PartialColoring find_half_coloring(const DenseMatrix& a, const Vec& delta,
                                   ColoringMode mode, int enum_cap = 20,
                                   int direct_cap = 16);

// Exact ceil(2^{4m/5}) in integer arithmetic (no float drift near m = 20).
std::uint64_t pigeonhole_threshold(int m);

}  // namespace entroround
