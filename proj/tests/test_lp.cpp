#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "entroround/lp.hpp"
#include "entroround/oracles.hpp"
#include "entroround/rng.hpp"

using namespace entroround;

namespace {

double min_cov(const SparseSolution& s, int n) {
    Vec cov = s.coverage(n);
    double m = 1e18;
    for (double c : cov) m = std::min(m, c);
    return m;
}

// Bin-only family: patterns are size-feasible subsets at cost 1.
PatternFamily bin_family(Vec sizes) {
    PatternFamily f;
    f.n = static_cast<int>(sizes.size());
    f.min_cost = 1.0;
    f.oracle = [sizes = std::move(sizes)](const Vec& y, double ep) {
        Pattern p = knapsack_fptas(y, sizes, ep);
        OracleChoice c;
        c.ratio = p.items.empty() ? 0.0 : sum_prices(y, p.items);
        c.pattern = std::move(p);
        return c;
    };
    return f;
}

PatternFamily rejection_family(Vec sizes, Vec pi) {
    PatternFamily f;
    f.n = static_cast<int>(sizes.size());
    f.min_cost = 1.0;
    for (double c : pi) f.min_cost = std::min(f.min_cost, c);
    f.oracle = [sizes = std::move(sizes), pi = std::move(pi)](const Vec& y, double ep) {
        return bpr_oracle(y, sizes, pi, ep);
    };
    return f;
}

// Every nonempty size-feasible subset as a cost-1 column, plus optional
// rejection singletons. Reference ground truth for n <= 8.
std::vector<Pattern> enumerate_columns(const Vec& sizes, const Vec* pi) {
    const int n = static_cast<int>(sizes.size());
    std::vector<Pattern> cols;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        double load = 0.0;
        Pattern p;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                load += sizes[static_cast<size_t>(i)];
                p.items.push_back(i);
            }
        if (load <= 1.0 + 1e-12) cols.push_back(std::move(p));
    }
    if (pi)
        for (int i = 0; i < n; ++i) cols.push_back(Pattern{{i}, (*pi)[static_cast<size_t>(i)]});
    return cols;
}

double exact_opt(const Vec& sizes, const Vec* pi) {
    SimplexResult ref =
        solve_covering_simplex(enumerate_columns(sizes, pi), static_cast<int>(sizes.size()));
    REQUIRE(ref.status == SimplexStatus::Optimal);
    REQUIRE(ref.certified);
    return ref.value;
}

}  // namespace

TEST_CASE("simplex prefers the shared column") {
    std::vector<Pattern> cols = {{{0}, 0.6}, {{1}, 0.6}, {{0, 1}, 1.0}};
    SimplexResult r = solve_covering_simplex(cols, 2);
    CHECK(r.status == SimplexStatus::Optimal);
    CHECK(r.certified);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.duals[0] + r.duals[1] == doctest::Approx(1.0));
}

TEST_CASE("simplex finds the half-integral optimum") {
    std::vector<Pattern> cols = {{{0, 1}, 1.0}, {{1, 2}, 1.0}, {{0, 2}, 1.0}};
    SimplexResult r = solve_covering_simplex(cols, 3);
    CHECK(r.status == SimplexStatus::Optimal);
    CHECK(r.certified);
    CHECK(r.value == doctest::Approx(1.5));
}

TEST_CASE("simplex reports an uncoverable element") {
    std::vector<Pattern> cols = {{{0}, 1.0}};
    CHECK(solve_covering_simplex(cols, 2).status == SimplexStatus::Infeasible);
    CHECK(solve_covering_simplex({}, 1).status == SimplexStatus::Infeasible);
}

TEST_CASE("simplex certifies random covers") {
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(5));
        std::vector<Pattern> cols;
        for (int i = 0; i < n; ++i) cols.push_back(Pattern{{i}, 0.2 + 0.8 * rng.uniform01()});
        for (int extra = 0; extra < 6; ++extra) {
            Pattern p;
            for (int i = 0; i < n; ++i)
                if (rng.below(2)) p.items.push_back(i);
            if (p.items.empty()) continue;
            p.cost = 0.2 + 0.8 * rng.uniform01();
            cols.push_back(std::move(p));
        }
        SimplexResult r = solve_covering_simplex(cols, n);
        CHECK(r.status == SimplexStatus::Optimal);
        CHECK(r.certified);
    }
}

TEST_CASE("single pattern at its own budget solves with weight one") {
    PatternFamily f;
    f.n = 1;
    f.min_cost = 0.5;
    f.oracle = [](const Vec& y, double) {
        Pattern p{{0}, 0.5};
        return OracleChoice{p, y[0] / 0.5};
    };
    CoverProblem prob{1, 0.5, 0.1, 1.0};
    MwResult res = mw_cover(prob, f);
    REQUIRE(res.status == MwStatus::Solved);
    REQUIRE(res.solution.entries.size() == 1);
    CHECK(res.solution.entries[0].weight == doctest::Approx(1.0));
    CHECK(min_cov(res.solution, 1) == doctest::Approx(1.0));
    CHECK(res.solution.objective == doctest::Approx(0.5));
}

TEST_CASE("a budget of one cannot cover two unit singletons") {
    PatternFamily f;
    f.n = 2;
    f.min_cost = 1.0;
    f.oracle = [](const Vec& y, double) {
        const int i = y[0] >= y[1] ? 0 : 1;
        return OracleChoice{Pattern{{i}, 1.0}, y[static_cast<size_t>(i)]};
    };
    CoverProblem prob{2, 1.0, 0.1, 1.0};
    MwResult res = mw_cover(prob, f);
    CHECK(res.status == MwStatus::Infeasible);
    CHECK(res.lower_bound > 1.0);
    CHECK(!res.note.empty());
}

TEST_CASE("toy packing at its exact value reaches target coverage") {
    PatternFamily f = bin_family({0.6, 0.6, 0.3, 0.3});
    CoverProblem prob{4, 2.0, 0.1, 2.0};
    PatternPool pool;
    MwResult res = mw_cover(prob, f, &pool);
    REQUIRE(res.status == MwStatus::Solved);
    CHECK(min_cov(res.solution, 4) >= 0.9);
    CHECK(res.solution.objective == doctest::Approx(2.0));
    CHECK(res.oracle_calls <= 200);
}

TEST_CASE("a starved call budget returns the best iterate") {
    // Rigged so no terminal state is reachable in 16 calls: the cheap
    // singleton dominates the prices early, the expensive one is needed for
    // coverage, and the budget sits above the optimum but the running
    // iterates move far too slowly.
    PatternFamily f;
    f.n = 2;
    f.min_cost = 0.2;
    f.oracle = [](const Vec& y, double) {
        const double r0 = y[0] / 1.0, r1 = y[1] / 0.2;
        if (r1 >= r0) return OracleChoice{Pattern{{1}, 0.2}, r1};
        return OracleChoice{Pattern{{0}, 1.0}, r0};
    };
    CoverProblem prob{2, 1.3, 0.01, 6.5};
    MwOptions opts;
    opts.accelerate = false;
    opts.kmax_factor = 0.0;  // floor of 16 calls
    MwResult res = mw_cover(prob, f, nullptr, opts);
    CHECK(res.status == MwStatus::IterationLimit);
    CHECK(res.oracle_calls == 16);
    CHECK(!res.note.empty());
    CHECK(!res.solution.entries.empty());
    CHECK(res.solution.objective == doctest::Approx(1.3));
}

TEST_CASE("sparsify leaves small supports alone") {
    SparseSolution s;
    s.entries = {{Pattern{{0}, 1.0}, 0.5}, {Pattern{{1}, 1.0}, 0.5}};
    s.tidy();
    SparseSolution out = sparsify_to_basic(s, 2);
    CHECK(out.entries.size() == 2);
    CHECK(out.objective == doctest::Approx(s.objective));
    CHECK(!out.sparsify_warning);
}

TEST_CASE("sparsify merges duplicate patterns") {
    SparseSolution s;
    s.entries = {{Pattern{{0, 1}, 1.0}, 0.3}, {Pattern{{0, 1}, 1.0}, 0.7}};
    SparseSolution out = sparsify_to_basic(s, 2);
    REQUIRE(out.entries.size() == 1);
    CHECK(out.entries[0].weight == doctest::Approx(1.0));
}

TEST_CASE("sparsify cuts oversized supports without moving coverage") {
    Xoshiro256 rng(92);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 6;
        SparseSolution s;
        while (s.entries.size() < 10) {
            Pattern p;
            for (int i = 0; i < n; ++i)
                if (rng.below(2)) p.items.push_back(i);
            if (p.items.empty()) continue;
            bool dup = false;
            for (const auto& e : s.entries) dup = dup || e.pattern == p;
            if (dup) continue;
            s.entries.push_back({std::move(p), 0.1 + 0.9 * rng.uniform01()});
        }
        s.tidy();
        Vec before = s.coverage(n);
        SparseSolution out = sparsify_to_basic(s, n);
        CHECK(!out.sparsify_warning);
        CHECK(out.entries.size() <= static_cast<size_t>(n));
        CHECK(out.objective <= s.objective + 1e-9);
        Vec after = out.coverage(n);
        for (int i = 0; i < n; ++i)
            CHECK(after[static_cast<size_t>(i)] ==
                  doctest::Approx(before[static_cast<size_t>(i)]).epsilon(1e-9));
        for (const auto& e : out.entries) CHECK(e.weight > 0.0);
    }
}

TEST_CASE("pattern lp on a single item costs one bin") {
    SparseSolution s = solve_pattern_lp(bin_family({0.6}), 0.05);
    CHECK(std::abs(s.objective - 1.0) <= 0.05);
    CHECK(s.entries.size() == 1);
    CHECK(min_cov(s, 1) >= 1.0 - 1e-9);
}

TEST_CASE("pattern lp pairs two half items into one bin") {
    SparseSolution s = solve_pattern_lp(bin_family({0.5, 0.5}), 0.05);
    CHECK(std::abs(s.objective - 1.0) <= 0.05);
    CHECK(min_cov(s, 2) >= 1.0 - 1e-9);
    CHECK(s.entries.size() <= 2);
}

TEST_CASE("pattern lp rejects three awkward items") {
    SparseSolution s = solve_pattern_lp(rejection_family({0.6, 0.6, 0.6}, {0.4, 0.4, 0.4}), 0.05);
    CHECK(std::abs(s.objective - 1.2) <= 0.05);
    CHECK(min_cov(s, 3) >= 1.0 - 1e-9);
}

TEST_CASE("pattern lp tracks the exact optimum on random bin instances") {
    Xoshiro256 rng(1234);
    const double delta = 0.05;
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(7));
        Vec sizes(static_cast<size_t>(n));
        for (double& v : sizes) v = 0.15 + 0.8 * rng.uniform01();
        SparseSolution s = solve_pattern_lp(bin_family(sizes), delta);
        const double opt = exact_opt(sizes, nullptr);
        CHECK(std::abs(s.objective - opt) <= delta);
        CHECK(min_cov(s, n) >= 1.0 - 1e-9);
        CHECK(s.entries.size() <= static_cast<size_t>(n));
        CHECK(s.objective == doctest::Approx(s.recompute_objective()).epsilon(1e-9));
        for (const auto& e : s.entries) {
            CHECK(e.weight > 0.0);
            CHECK(e.weight <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("pattern lp tracks the exact optimum with rejections") {
    Xoshiro256 rng(4321);
    const double delta = 0.05;
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(7));
        Vec sizes(static_cast<size_t>(n)), pi(static_cast<size_t>(n));
        for (double& v : sizes) v = 0.15 + 0.8 * rng.uniform01();
        for (double& v : pi) v = 0.1 + 0.9 * rng.uniform01();
        SparseSolution s = solve_pattern_lp(rejection_family(sizes, pi), delta);
        const double opt = exact_opt(sizes, &pi);
        CHECK(std::abs(s.objective - opt) <= delta);
        CHECK(min_cov(s, n) >= 1.0 - 1e-9);
        CHECK(s.entries.size() <= static_cast<size_t>(n));
    }
}
