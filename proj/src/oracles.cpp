#include "entroround/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace entroround {

namespace {

constexpr double kSizeTol = 1e-12;

void validate_prices(const Vec& y) {
    for (double v : y)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("oracle: prices must be finite and nonnegative");
}

void validate_sizes(const Vec& sizes) {
    for (double s : sizes)
        if (!(s > 0.0) || s > 1.0)
            throw std::invalid_argument("oracle: sizes must lie in (0,1]");
}

}  // namespace

Pattern knapsack_fptas(const Vec& y, const Vec& sizes, double eps) {
    const int n = static_cast<int>(y.size());
    if (sizes.size() != y.size())
        throw std::invalid_argument("knapsack_fptas: length mismatch");
    if (!(eps > 0.0) || eps >= 1.0)
        throw std::invalid_argument("knapsack_fptas: eps must lie in (0,1)");
    validate_prices(y);
    validate_sizes(sizes);

    double y_max = 0.0;
    for (double v : y) y_max = std::max(y_max, v);
    if (y_max <= 0.0) return Pattern{{}, 1.0};

    // Scaled integer profits; the scale keeps the rounding loss below
    // eps * y_max <= eps * OPT since the best single item always fits.
    const double scale = static_cast<double>(n) / (eps * y_max);
    std::vector<long long> profit(static_cast<size_t>(n));
    long long total = 0;
    for (int i = 0; i < n; ++i) {
        profit[static_cast<size_t>(i)] =
            static_cast<long long>(std::floor(y[static_cast<size_t>(i)] * scale));
        total += profit[static_cast<size_t>(i)];
    }

    // suffix[i][v]: minimum size of a subset of items i..n-1 with scaled
    // profit exactly v. Kept per item so reconstruction can walk forward.
    const size_t width = static_cast<size_t>(total) + 1;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> suffix(static_cast<size_t>(n) + 1,
                                            std::vector<double>(width, inf));
    suffix[static_cast<size_t>(n)][0] = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        const auto& nxt = suffix[static_cast<size_t>(i) + 1];
        auto& cur = suffix[static_cast<size_t>(i)];
        const long long p = profit[static_cast<size_t>(i)];
        const double s = sizes[static_cast<size_t>(i)];
        for (size_t v = 0; v < width; ++v) {
            double best = nxt[v];
            if (static_cast<long long>(v) >= p) {
                const double with = nxt[v - static_cast<size_t>(p)] + s;
                if (with < best) best = with;
            }
            cur[v] = best;
        }
    }

    size_t vstar = 0;
    for (size_t v = 0; v < width; ++v)
        if (suffix[0][v] <= 1.0 + kSizeTol) vstar = v;

    // Forward reconstruction, taking the earliest item whenever an optimal
    // completion through it exists; stop once no scaled value remains.
    Pattern out;
    out.cost = 1.0;
    double cap = 1.0;
    size_t v = vstar;
    for (int i = 0; i < n && v > 0; ++i) {
        const long long p = profit[static_cast<size_t>(i)];
        const double s = sizes[static_cast<size_t>(i)];
        if (static_cast<long long>(v) < p) continue;
        if (suffix[static_cast<size_t>(i) + 1][v - static_cast<size_t>(p)] <=
            cap - s + kSizeTol) {
            out.items.push_back(i);
            cap -= s;
            v -= static_cast<size_t>(p);
        }
    }

    double load = 0.0;
    for (int i : out.items) load += sizes[static_cast<size_t>(i)];
    if (load > 1.0 + 1e-9)
        throw std::logic_error("knapsack_fptas: produced an oversized set");
    return out;
}

OracleChoice bpr_oracle(const Vec& y, const Vec& sizes, const Vec& pi, double eps) {
    const int n = static_cast<int>(y.size());
    if (pi.size() != y.size() || sizes.size() != y.size())
        throw std::invalid_argument("bpr_oracle: length mismatch");
    validate_prices(y);
    for (double p : pi)
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("bpr_oracle: rejection costs must lie in (0,1]");

    double y_max = 0.0;
    for (double v : y) y_max = std::max(y_max, v);
    if (y_max <= 0.0) return OracleChoice{Pattern{{}, 1.0}, 0.0};

    Pattern knap = knapsack_fptas(y, sizes, eps);
    const double knap_ratio = sum_prices(y, knap.items);  // cost 1

    int best_i = 0;
    double best_single = -1.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[static_cast<size_t>(i)] / pi[static_cast<size_t>(i)];
        if (r > best_single) {
            best_single = r;
            best_i = i;
        }
    }
    Pattern single{{best_i}, pi[static_cast<size_t>(best_i)]};

    if (best_single > knap_ratio) return OracleChoice{single, best_single};
    if (knap_ratio > best_single) return OracleChoice{knap, knap_ratio};
    return pattern_less(single, knap) ? OracleChoice{single, best_single}
                                      : OracleChoice{knap, knap_ratio};
}

OracleChoice train_oracle(const Vec& y, const Vec& sizes, const Vec& positions, double eps) {
    const int n = static_cast<int>(y.size());
    if (positions.size() != y.size() || sizes.size() != y.size())
        throw std::invalid_argument("train_oracle: length mismatch");
    validate_prices(y);
    for (double p : positions)
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("train_oracle: positions must lie in (0,1]");

    double y_max = 0.0;
    for (double v : y) y_max = std::max(y_max, v);
    if (y_max <= 0.0) return OracleChoice{Pattern{{}, 1.0}, 0.0};

    std::vector<double> thresholds = positions;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    bool have = false;
    OracleChoice best;
    for (double pk : thresholds) {
        std::vector<int> allowed;
        Vec sub_y, sub_s;
        for (int i = 0; i < n; ++i)
            if (positions[static_cast<size_t>(i)] <= pk) {
                allowed.push_back(i);
                sub_y.push_back(y[static_cast<size_t>(i)]);
                sub_s.push_back(sizes[static_cast<size_t>(i)]);
            }
        Pattern sub = knapsack_fptas(sub_y, sub_s, eps);
        Pattern cand;
        cand.cost = pk;
        for (int k : sub.items) cand.items.push_back(allowed[static_cast<size_t>(k)]);
        const double ratio = sum_prices(y, cand.items) / pk;
        if (!have || ratio > best.ratio ||
            (ratio == best.ratio && pattern_less(cand, best.pattern))) {
            best = OracleChoice{cand, ratio};
            have = true;
        }
    }
    return best;
}

}  // namespace entroround
