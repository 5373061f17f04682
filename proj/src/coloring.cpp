#include "entroround/coloring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "entroround/rng.hpp"

namespace entroround {
namespace {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using u128 = unsigned __int128;

constexpr double kRowTol = 1e-9;

inline u64 mix64(u64 z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

struct Hash128 {
    size_t operator()(u128 x) const {
        return static_cast<size_t>(mix64(static_cast<u64>(x) ^ mix64(static_cast<u64>(x >> 64))));
    }
};

inline u128 key_of(const double* sums, const double* inv2d, int n) {
    u64 h1 = 0x243F6A8885A308D3ULL;
    u64 h2 = 0x13198A2E03707344ULL;
    for (int i = 0; i < n; ++i) {
        const u64 k = static_cast<u64>(nearest_int_tie_down(sums[i] * inv2d[i]));
        h1 = mix64(h1 + k + 0x9E3779B97F4A7C15ULL);
        h2 = mix64(h2 ^ (k * 0xC2B2AE3D27D4EB4FULL));
    }
    return (static_cast<u128>(h1) << 64) | h2;
}

PartialColoring half_difference(u32 plus_mask, u32 minus_mask, int m) {
    PartialColoring chi(m);
    const u32 diff = plus_mask ^ minus_mask;
    for (int j = 0; j < m; ++j) {
        if (!((diff >> j) & 1U)) continue;
        chi.v[j] = ((plus_mask >> j) & 1U) ? 1 : -1;
    }
    return chi;
}

bool within_row_bounds(const DenseMatrix& a, const Vec& delta, const PartialColoring& chi) {
    for (int i = 0; i < a.rows; ++i)
        if (std::abs(dot_coloring(a, i, chi)) > delta[i] + kRowTol) return false;
    return true;
}

void validate_inputs(const DenseMatrix& a, const Vec& delta) {
    if (static_cast<int>(delta.size()) != a.rows)
        throw std::invalid_argument("find_half_coloring: delta length != row count");
    for (double d : delta)
        if (!(d > 0.0)) throw std::invalid_argument("find_half_coloring: delta must be positive");
    a.check_finite("find_half_coloring");
    if (a.cols < 1) throw std::invalid_argument("find_half_coloring: need at least one column");
}

PartialColoring pigeonhole_search(const DenseMatrix& a, const Vec& delta, int enum_cap) {
    const int m = a.cols;
    const int n = a.rows;
    if (m > enum_cap)
        throw std::invalid_argument("find_half_coloring: column count exceeds enumeration cap");

    std::vector<double> inv2d(n);
    for (int i = 0; i < n; ++i) inv2d[i] = 1.0 / (2.0 * delta[i]);

    const u64 total = 1ULL << m;
    const u64 threshold = pigeonhole_threshold(m);

    // Pass 1: bucket sizes only (keeps memory flat at m near the cap).
    std::vector<double> sums(n, 0.0);
    auto reset_sums = [&] {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < m; ++j) s -= a.at(i, j);
            sums[i] = s;
        }
    };
    reset_sums();

    std::unordered_map<u128, u64, Hash128> counts;
    counts.reserve(static_cast<size_t>(total / 2 + 1));
    for (u64 g = 0;;) {
        ++counts[key_of(sums.data(), inv2d.data(), n)];
        if (g + 1 == total) break;
        ++g;
        const int j = std::countr_zero(g);
        const u64 mask = g ^ (g >> 1);
        const double f = ((mask >> j) & 1ULL) ? 2.0 : -2.0;
        for (int i = 0; i < n; ++i) sums[i] += f * a.at(i, j);
    }

    std::vector<std::pair<u128, u64>> big;
    for (const auto& [key, cnt] : counts)
        if (cnt >= threshold) big.emplace_back(key, cnt);
    if (big.empty()) throw NoLargeBucket("find_half_coloring: no signature bucket reaches 2^(4m/5)");
    std::sort(big.begin(), big.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (big.size() > 64) big.resize(64);

    // Pass 2: collect members of the qualifying buckets only.
    std::unordered_map<u128, size_t, Hash128> slot;
    for (size_t k = 0; k < big.size(); ++k) slot.emplace(big[k].first, k);
    std::vector<std::vector<u32>> members(big.size());
    for (size_t k = 0; k < big.size(); ++k) members[k].reserve(big[k].second);

    reset_sums();
    for (u64 g = 0;;) {
        const u128 key = key_of(sums.data(), inv2d.data(), n);
        if (auto it = slot.find(key); it != slot.end())
            members[it->second].push_back(static_cast<u32>(g ^ (g >> 1)));
        if (g + 1 == total) break;
        ++g;
        const int j = std::countr_zero(g);
        const u64 mask = g ^ (g >> 1);
        const double f = ((mask >> j) & 1ULL) ? 2.0 : -2.0;
        for (int i = 0; i < n; ++i) sums[i] += f * a.at(i, j);
    }

    for (const auto& bucket : members) {
        if (bucket.size() < 2) continue;
        const FarthestPair pair = farthest_pair(bucket, m);
        if (!pair.met_threshold) continue;
        PartialColoring chi = half_difference(pair.first, pair.second, m);
        if (within_row_bounds(a, delta, chi)) return chi;
    }
    throw NoValidColoring("find_half_coloring: no qualifying bucket produced a valid pair");
}

// Decreasing-support sweep over {-1,0,+1}^m. The first element of each
// support set is pinned to +1 (chi and -chi are interchangeable); the
// remaining signs advance in Gray order with incremental row sums.
PartialColoring direct_search(const DenseMatrix& a, const Vec& delta, int direct_cap) {
    const int m = a.cols;
    const int n = a.rows;
    if (m > direct_cap)
        throw std::invalid_argument("find_half_coloring: column count exceeds direct-search cap");

    std::vector<int> idx(static_cast<size_t>(m));
    std::vector<double> sums(n);

    for (int s = m; s >= (m + 1) / 2; --s) {
        // Lexicographic combinations of size s.
        for (int t = 0; t < s; ++t) idx[t] = t;
        for (;;) {
            // Signs: idx[0] fixed +1, others start -1 and follow Gray code.
            for (int i = 0; i < n; ++i) {
                double v = a.at(i, idx[0]);
                for (int t = 1; t < s; ++t) v -= a.at(i, idx[t]);
                sums[i] = v;
            }
            const u64 patterns = (s > 1) ? (1ULL << (s - 1)) : 1ULL;
            u64 signbits = 0;  // bit t-1 set <=> idx[t] currently +1
            for (u64 g = 0;;) {
                bool ok = true;
                for (int i = 0; i < n; ++i)
                    if (std::abs(sums[i]) > delta[i] + kRowTol) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    PartialColoring chi(m);
                    chi.v[idx[0]] = 1;
                    for (int t = 1; t < s; ++t)
                        chi.v[idx[t]] = ((signbits >> (t - 1)) & 1ULL) ? 1 : -1;
                    return chi;
                }
                if (g + 1 == patterns) break;
                ++g;
                const int bit = std::countr_zero(g);
                const u64 mask = g ^ (g >> 1);
                signbits = mask;
                const double f = ((mask >> bit) & 1ULL) ? 2.0 : -2.0;
                const int col = idx[bit + 1];
                for (int i = 0; i < n; ++i) sums[i] += f * a.at(i, col);
            }

            // Advance the combination.
            int t = s - 1;
            while (t >= 0 && idx[t] == m - s + t) --t;
            if (t < 0) break;
            ++idx[t];
            for (int u = t + 1; u < s; ++u) idx[u] = idx[u - 1] + 1;
        }
    }
    throw NoValidColoring("find_half_coloring: direct search exhausted without a valid coloring");
}

}  // namespace

SignatureVector rounded_signature(const DenseMatrix& a, const PartialColoring& chi,
                                  const Vec& delta) {
    if (chi.size() != a.cols)
        throw std::invalid_argument("rounded_signature: coloring length != column count");
    if (static_cast<int>(delta.size()) != a.rows)
        throw std::invalid_argument("rounded_signature: delta length != row count");
    SignatureVector sig(static_cast<size_t>(a.rows));
    for (int i = 0; i < a.rows; ++i) {
        if (!(delta[i] > 0.0))
            throw std::invalid_argument("rounded_signature: delta must be positive");
        sig[i] = nearest_int_tie_down(dot_coloring(a, i, chi) / (2.0 * delta[i]));
    }
    return sig;
}

std::uint64_t pigeonhole_threshold(int m) {
    if (m < 0 || m > 20) throw std::invalid_argument("pigeonhole_threshold: m out of range");
    const int q = 4 * m;
    if (q % 5 == 0) return 1ULL << (q / 5);
    // Smallest T with T^5 >= 2^q; q <= 80 keeps T^5 inside 128 bits.
    const u128 target = static_cast<u128>(1) << q;
    u64 lo = 1, hi = 1ULL << (q / 5 + 1);
    while (lo < hi) {
        const u64 mid = lo + (hi - lo) / 2;
        u128 p = 1;
        for (int k = 0; k < 5; ++k) p *= mid;
        if (p >= target)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

FarthestPair farthest_pair(const std::vector<std::uint32_t>& bucket, int m) {
    if (bucket.size() < 2)
        throw std::invalid_argument("farthest_pair: bucket needs at least two members");
    const size_t n = bucket.size();
    FarthestPair best;

    auto consider = [&](u32 x, u32 y) {
        const int d = std::popcount(x ^ y);
        if (d > best.distance) {
            best.first = x;
            best.second = y;
            best.distance = d;
        }
    };

    if (n <= 4096) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) consider(bucket[i], bucket[j]);
    } else {
        // Seeded sampling, then alternating one-sided sweeps from the best
        // pair. Deterministic for fixed input.
        Xoshiro256 rng(0x7A17FA1277A17ULL);
        for (int t = 0; t < 100000; ++t) {
            const size_t i = static_cast<size_t>(rng.below(n));
            size_t j = static_cast<size_t>(rng.below(n - 1));
            if (j >= i) ++j;
            consider(bucket[i], bucket[j]);
        }
        for (int round = 0; round < 16; ++round) {
            const int before = best.distance;
            u32 anchor = (round % 2 == 0) ? best.first : best.second;
            for (u32 x : bucket) consider(anchor, x);
            if (best.distance == before) break;
        }
    }
    best.met_threshold = (2 * best.distance >= m);
    return best;
}

PartialColoring find_half_coloring(const DenseMatrix& a, const Vec& delta, ColoringMode mode,
                                   int enum_cap, int direct_cap) {
    validate_inputs(a, delta);
    PartialColoring chi = (mode == ColoringMode::Pigeonhole)
                              ? pigeonhole_search(a, delta, enum_cap)
                              : direct_search(a, delta, direct_cap);
    // Postconditions hold by construction; keep the cheap safety net.
    if (chi.support() * 2 < a.cols)
        throw NoValidColoring("find_half_coloring: support below m/2");
    if (!within_row_bounds(a, delta, chi))
        throw NoValidColoring("find_half_coloring: row bound violated");
    return chi;
}

}  // namespace entroround
