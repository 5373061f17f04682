#include "entroround/entropy.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "entroround/coloring.hpp"

namespace entroround {
namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

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

// Two independently mixed 64-bit lanes; collisions over <= 2^20 distinct
// signatures are beyond negligible, so bucket counts stay exact in practice.
inline u128 signature_key(const double* sums, const double* inv2d, int n) {
    u64 h1 = 0x243F6A8885A308D3ULL;
    u64 h2 = 0x13198A2E03707344ULL;
    for (int i = 0; i < n; ++i) {
        const u64 k = static_cast<u64>(nearest_int_tie_down(sums[i] * inv2d[i]));
        h1 = mix64(h1 + k + 0x9E3779B97F4A7C15ULL);
        h2 = mix64(h2 ^ (k * 0xC2B2AE3D27D4EB4FULL));
    }
    return (static_cast<u128>(h1) << 64) | h2;
}

}  // namespace

double shannon_entropy(const std::vector<double>& probs) {
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("shannon_entropy: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("shannon_entropy: probabilities must sum to 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

double exact_joint_entropy(const DenseMatrix& a, const Vec& delta, int enum_cap) {
    if (static_cast<int>(delta.size()) != a.rows)
        throw std::invalid_argument("exact_joint_entropy: delta length != row count");
    for (double d : delta)
        if (!(d > 0.0)) throw std::invalid_argument("exact_joint_entropy: delta must be positive");
    if (a.cols > enum_cap)
        throw std::invalid_argument("exact_joint_entropy: column count exceeds enumeration cap");
    a.check_finite("exact_joint_entropy");

    const int m = a.cols;
    const int n = a.rows;
    if (m == 0 || n == 0) return 0.0;

    std::vector<double> inv2d(n);
    for (int i = 0; i < n; ++i) inv2d[i] = 1.0 / (2.0 * delta[i]);

    // Gray-code sweep: start at all -1, one sign flip per step.
    std::vector<double> sums(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s -= a.at(i, j);
        sums[i] = s;
    }

    const u64 total = 1ULL << m;
    std::unordered_map<u128, u64, Hash128> counts;
    counts.reserve(static_cast<size_t>(total / 2 + 1));

    for (u64 g = 0;;) {
        ++counts[signature_key(sums.data(), inv2d.data(), n)];
        if (g + 1 == total) break;
        ++g;
        const int j = std::countr_zero(g);
        const u64 mask = g ^ (g >> 1);
        const double f = ((mask >> j) & 1ULL) ? 2.0 : -2.0;
        for (int i = 0; i < n; ++i) sums[i] += f * a.at(i, j);
    }

    const double tot = static_cast<double>(total);
    double h = 0.0;
    for (const auto& [key, cnt] : counts) {
        (void)key;
        const double p = static_cast<double>(cnt) / tot;
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;
}

}  // namespace entroround
