#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "entroround/binpack.hpp"
#include "entroround/config.hpp"
#include "entroround/entropy.hpp"
#include "entroround/rng.hpp"

using namespace entroround;

namespace {

Pattern pat(std::vector<int> items, double cost) {
    Pattern p;
    p.items = std::move(items);
    p.cost = cost;
    return p;
}

PackingInstance plain(Vec sizes) {
    PackingInstance inst;
    inst.sizes = std::move(sizes);
    return inst;
}

PackingInstance with_rejection(Vec sizes, Vec pi) {
    PackingInstance inst;
    inst.sizes = std::move(sizes);
    inst.rejection_costs = std::move(pi);
    return inst;
}

PackingInstance with_positions(Vec sizes, Vec pos) {
    PackingInstance inst;
    inst.sizes = std::move(sizes);
    inst.positions = std::move(pos);
    return inst;
}

PackingInstance random_bpr(Xoshiro256& rng, int n) {
    Vec sizes, pi;
    for (int i = 0; i < n; ++i) sizes.push_back(0.08 + 0.9 * rng.uniform01());
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    for (int i = 0; i < n; ++i) pi.push_back(0.05 + 0.95 * rng.uniform01());
    return with_rejection(std::move(sizes), std::move(pi));
}

PackingInstance random_train(Xoshiro256& rng, int n) {
    Vec sizes, pos;
    for (int i = 0; i < n; ++i) sizes.push_back(0.08 + 0.9 * rng.uniform01());
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    for (int i = 0; i < n; ++i) pos.push_back(0.05 + 0.95 * rng.uniform01());
    return with_positions(std::move(sizes), std::move(pos));
}

}  // namespace

TEST_CASE("instance validation rejects malformed inputs") {
    CHECK_THROWS_AS(plain({0.3, 0.5}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(plain({1.5}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(plain({0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(with_rejection({0.5, 0.4}, {0.2}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(with_positions({0.5}, {1.2}).validate(), std::invalid_argument);
    PackingInstance both = with_rejection({0.5}, {0.2});
    both.positions = {0.5};
    CHECK_THROWS_AS(both.validate(), std::invalid_argument);
    CHECK_NOTHROW(plain({0.5, 0.5, 0.1}).validate());
}

TEST_CASE("cumulated matrix columns, sigma, beta, and slacks") {
    Vec sizes = {0.5, 0.5, 0.5};
    std::vector<Pattern> pool = {pat({0, 1}, 1.0), pat({1, 2}, 1.0), pat({}, 1.0)};
    CumulatedMatrix cum = cumulated_matrix(pool, {0, 1, 2}, sizes, 2.0);
    REQUIRE(cum.entries.rows == 3);
    REQUIRE(cum.entries.cols == 3);
    CHECK(cum.entries.at(0, 0) == 1.0);
    CHECK(cum.entries.at(1, 0) == 2.0);
    CHECK(cum.entries.at(2, 0) == 2.0);
    CHECK(cum.entries.at(0, 1) == 0.0);
    CHECK(cum.entries.at(1, 1) == 1.0);
    CHECK(cum.entries.at(2, 1) == 2.0);
    for (int i = 0; i < 3; ++i) CHECK(cum.entries.at(i, 2) == 0.0);
    CHECK(cum.sigma == doctest::Approx(4.0));
    CHECK(cum.beta == doctest::Approx(2.0));
    for (double d : cum.deltas) CHECK(d == doctest::Approx(4.0));

    // Rows restricted to a subset count only subset members.
    CumulatedMatrix part = cumulated_matrix(pool, {1}, sizes, 2.0);
    REQUIRE(part.entries.rows == 1);
    CHECK(part.entries.at(0, 0) == 1.0);
    CHECK(part.entries.at(0, 1) == 1.0);
    CHECK(part.sigma == doctest::Approx(2.0));
    CHECK(part.beta == doctest::Approx(1.0));

    Vec varied = {1.0, 0.5, 0.25};
    CumulatedMatrix scaled = cumulated_matrix(pool, {0, 1, 2}, varied, 2.0);
    CHECK(scaled.deltas[0] == doctest::Approx(2.0));
    CHECK(scaled.deltas[1] == doctest::Approx(4.0));
    CHECK(scaled.deltas[2] == doctest::Approx(8.0));
}

TEST_CASE("entropy budget bound plugs in sigma and beta") {
    Vec sizes = {0.5, 0.5, 0.5};
    std::vector<Pattern> pool = {pat({0, 1}, 1.0), pat({1, 2}, 1.0)};
    CumulatedMatrix cum = cumulated_matrix(pool, {0, 1, 2}, sizes, 2.0);
    CHECK(entropy_budget_bound(cum, 2.0, 1.0) == doctest::Approx(2.0));

    CumulatedMatrix zero = cumulated_matrix({pat({}, 1.0)}, {0, 1, 2}, sizes, 2.0);
    CHECK(entropy_budget_bound(zero, 2.0, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(entropy_budget_bound(cum, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("deficits count slots per prefix") {
    std::vector<int> domain = {0, 1, 2};
    std::vector<long long> empty = check_deficits({}, {}, domain);
    CHECK(empty == std::vector<long long>{1, 2, 3});

    std::vector<long long> gap = check_deficits({pat({0, 2}, 1.0)}, {}, domain);
    CHECK(gap == std::vector<long long>{0, 1, 1});

    std::vector<long long> covered =
        check_deficits({pat({0}, 1.0), pat({1, 2}, 1.0)}, {}, domain);
    CHECK(covered == std::vector<long long>{0, 0, 0});

    // Repair slots count like pattern slots, repeats included.
    RepairBin rb;
    rb.slots = {0, 0};
    std::vector<long long> repaired = check_deficits({pat({2}, 1.0)}, {rb}, domain);
    CHECK(repaired == std::vector<long long>{0, 0, 0});
}

TEST_CASE("slot assignment walks the index rule") {
    // Exact cover: identity assignment.
    std::vector<Pattern> cover = {pat({0, 1}, 1.0)};
    SlotAssignment both = assign_items_to_slots(cover, {}, {0, 1}, false);
    REQUIRE(both.ok);
    CHECK(both.pattern_items[0] == std::vector<int>{0, 1});

    // A later slot cannot host an earlier (larger) item.
    SlotAssignment dry = assign_items_to_slots({pat({0}, 1.0)}, {}, {0, 1}, false);
    CHECK_FALSE(dry.ok);
    CHECK(dry.deficient_prefix == 2);

    // The item prefers the largest slot index it is allowed to take.
    std::vector<Pattern> two = {pat({0}, 1.0), pat({1}, 1.0)};
    SlotAssignment pick = assign_items_to_slots(two, {}, {1}, false);
    REQUIRE(pick.ok);
    CHECK(pick.pattern_items[0].empty());
    CHECK(pick.pattern_items[1] == std::vector<int>{1});

    // Rejection slots serve only their own item.
    std::vector<Pattern> rej = {pat({0}, 0.3), pat({1}, 1.0)};
    SlotAssignment served = assign_items_to_slots(rej, {}, {0, 1}, true);
    REQUIRE(served.ok);
    CHECK(served.rejected == std::vector<int>{0});
    CHECK(served.pattern_items[1] == std::vector<int>{1});

    SlotAssignment starved = assign_items_to_slots({pat({0}, 0.3)}, {}, {0, 1}, true);
    CHECK_FALSE(starved.ok);
    CHECK(starved.deficient_prefix == 2);

    // Without rejection mode the cheap singleton is an ordinary slot.
    SlotAssignment tour = assign_items_to_slots({pat({0}, 0.3)}, {}, {0}, false);
    REQUIRE(tour.ok);
    CHECK(tour.pattern_items[0] == std::vector<int>{0});
}

TEST_CASE("repair rounds clear deficits and split on capacity") {
    // Already covered: nothing bought.
    Vec half = {0.3, 0.3, 0.3};
    ItemGroups g1 = build_groups(half, {0, 1, 2}, 0.25);
    std::vector<RepairBin> none =
        repair_large({pat({0, 1, 2}, 1.0)}, {0, 1, 2}, g1, half, 2.0);
    CHECK(none.empty());

    // One group, worst deficit 3: three bins, each one copy of the top item.
    std::vector<RepairBin> three = repair_large({}, {0, 1, 2}, g1, half, 2.0);
    REQUIRE(three.size() == 3);
    for (const RepairBin& rb : three) CHECK(rb.slots == std::vector<int>{0});
    CHECK(check_deficits({}, three, {0, 1, 2}) == std::vector<long long>{0, 0, 0});

    // Representatives 0.7 and 0.5 do not share a bin: two bins per round.
    Vec wide = {0.7, 0.5};
    ItemGroups g2 = build_groups(wide, {0, 1}, 0.25);
    REQUIRE(g2.size_groups.size() == 2);
    std::vector<RepairBin> split = repair_large({}, {0, 1}, g2, wide, 2.0);
    REQUIRE(split.size() == 2);
    CHECK(split[0].slots == std::vector<int>{0});
    CHECK(split[1].slots == std::vector<int>{1});
    CHECK(check_deficits({}, split, {0, 1}) == std::vector<long long>{0, 0});

    // Random instances always end at zero deficits.
    Xoshiro256 rng(71);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 2 + static_cast<int>(rng.below(8));
        Vec sizes;
        for (int i = 0; i < n; ++i) sizes.push_back(0.26 + 0.74 * rng.uniform01());
        std::sort(sizes.begin(), sizes.end(), std::greater<>());
        std::vector<int> domain;
        for (int i = 0; i < n; ++i) domain.push_back(i);
        std::vector<Pattern> chosen;
        if (rng.below(2) == 0) chosen.push_back(pat({0}, 1.0));
        ItemGroups groups = build_groups(sizes, domain, 0.25);
        std::vector<RepairBin> extra =
            repair_large(chosen, domain, groups, sizes, 2.0);
        std::vector<long long> def = check_deficits(chosen, extra, domain);
        for (long long d : def) CHECK(d == 0);
        for (const RepairBin& rb : extra) {
            double load = 0.0;
            for (int t : rb.slots) load += sizes[static_cast<size_t>(t)];
            CHECK(load <= 1.0 + 1e-9);
        }
        SlotAssignment asg = assign_items_to_slots(chosen, extra, domain, true);
        CHECK(asg.ok);
    }
}

TEST_CASE("fractional small-item fill discards at boundaries only") {
    Vec sizes = {0.4, 0.4, 0.2};

    SmallAssignment nothing = assign_small_fractional({0.5}, {}, sizes);
    CHECK(nothing.discarded.empty());
    CHECK(nothing.per_space[0].empty());

    SmallAssignment roomy = assign_small_fractional({1.0}, {0, 1}, sizes);
    CHECK(roomy.per_space[0] == std::vector<int>{0, 1});
    CHECK(roomy.discarded.empty());

    // Item 1 straddles the boundary between the two spaces and is dropped.
    SmallAssignment split = assign_small_fractional({0.5, 0.5}, {0, 1, 2}, sizes);
    CHECK(split.per_space[0] == std::vector<int>{0});
    CHECK(split.per_space[1] == std::vector<int>{2});
    CHECK(split.discarded == std::vector<int>{1});

    CHECK_THROWS_AS(assign_small_fractional({0.3}, {0}, sizes), std::runtime_error);
}

TEST_CASE("well rounding raises positions to grades and clamps near the depot") {
    double grade3 = std::pow(1.1, -3.0);
    PackingInstance inst = with_positions({0.5, 0.5, 0.5}, {grade3, 0.5, 0.01});
    PackingInstance rounded = well_round(inst, 0.1);
    CHECK(rounded.positions[0] == doctest::Approx(grade3).epsilon(1e-9));
    CHECK(rounded.positions[1] == doctest::Approx(std::pow(1.1, -7.0)).epsilon(1e-9));
    CHECK(rounded.positions[1] == doctest::Approx(0.51316).epsilon(1e-3));
    // Clamped to the smallest grade still at or above eps.
    CHECK(rounded.positions[2] >= 0.1);
    CHECK(rounded.positions[2] == doctest::Approx(std::pow(1.1, -24.0)).epsilon(1e-9));
    CHECK(std::pow(1.1, -25.0) < 0.1);
    for (double p : rounded.positions) CHECK(p >= inst.positions[1] * 0.0);  // stays positive
}

TEST_CASE("item groups follow halving grades") {
    Vec sizes = {1.0, 0.5, 0.3, 0.2, 0.1};
    ItemGroups g = build_groups(sizes, {0, 1, 2, 3, 4}, 0.25);
    CHECK(g.large_count == 3);
    REQUIRE(g.size_groups.size() == 2);
    CHECK(g.size_groups[0] == std::vector<int>{0});
    CHECK(g.size_groups[1] == std::vector<int>{1, 2});
}

TEST_CASE("brute force matches hand enumeration") {
    BruteForceResult lone = brute_force_opt(plain({0.5}));
    CHECK(lone.integer_opt == doctest::Approx(1.0));
    CHECK(lone.fractional_available);
    CHECK(lone.fractional_opt == doctest::Approx(1.0));

    BruteForceResult pair = brute_force_opt(plain({0.5, 0.5}));
    CHECK(pair.integer_opt == doctest::Approx(1.0));
    CHECK(pair.fractional_opt == doctest::Approx(1.0));

    BruteForceResult reject = brute_force_opt(with_rejection({0.6, 0.6}, {0.4, 0.4}));
    CHECK(reject.integer_opt == doctest::Approx(0.8));
    CHECK(reject.fractional_opt == doctest::Approx(0.8));

    BruteForceResult cheap = brute_force_opt(with_rejection({0.5}, {0.2}));
    CHECK(cheap.integer_opt == doctest::Approx(0.2));

    BruteForceResult tour = brute_force_opt(with_positions({0.5}, {1.0}));
    CHECK(tour.integer_opt == doctest::Approx(1.0));

    BruteForceResult shared = brute_force_opt(with_positions({0.4, 0.4}, {1.0, 1.0}));
    CHECK(shared.integer_opt == doctest::Approx(1.0));

    Vec big(9, 0.1);
    BruteForceResult capped = brute_force_opt(plain(big));
    CHECK(capped.integer_opt == doctest::Approx(1.0));
    CHECK_FALSE(capped.fractional_available);

    Vec over(13, 0.1);
    CHECK_THROWS_AS(brute_force_opt(plain(over)), std::invalid_argument);
}

TEST_CASE("solution checker flags broken outputs") {
    PackingInstance inst = plain({0.6, 0.6});
    PackingSolution sol;
    sol.bins = {{0}, {1}};
    sol.total_cost = 2.0;
    CHECK(check_packing(inst, sol).empty());

    PackingSolution overfull = sol;
    overfull.bins = {{0, 1}};
    overfull.total_cost = 1.0;
    CHECK(check_packing(inst, overfull).find("overfull") != std::string::npos);

    PackingSolution missing = sol;
    missing.bins = {{0}};
    missing.total_cost = 1.0;
    CHECK(check_packing(inst, missing).find("unplaced") != std::string::npos);

    PackingSolution doubled = sol;
    doubled.bins = {{0}, {0}, {1}};
    doubled.total_cost = 3.0;
    CHECK(check_packing(inst, doubled).find("more than once") != std::string::npos);

    PackingSolution hollow = sol;
    hollow.bins = {{0}, {1}, {}};
    hollow.total_cost = 3.0;
    CHECK(check_packing(inst, hollow).find("empty") != std::string::npos);

    PackingSolution wrong = sol;
    wrong.total_cost = 5.0;
    CHECK(check_packing(inst, wrong).find("cost") != std::string::npos);

    PackingSolution rejected = sol;
    rejected.bins = {{0}};
    rejected.rejected = {1};
    rejected.total_cost = 1.0;
    CHECK(check_packing(inst, rejected) == "rejection without rejection costs");
}

TEST_CASE("bpr pipeline solves the pinned examples") {
    const Config& cfg = default_config();

    PackingSolution cheap = solve_bpr(with_rejection({0.5}, {0.2}), cfg, 11);
    CHECK(check_packing(with_rejection({0.5}, {0.2}), cheap).empty());
    CHECK(cheap.total_cost == doctest::Approx(0.2));
    CHECK(cheap.rejected == std::vector<int>{0});
    CHECK(cheap.bins.empty());

    PackingInstance two = with_rejection({0.6, 0.6}, {1.0, 1.0});
    PackingSolution dual = solve_bpr(two, cfg, 12);
    CHECK(check_packing(two, dual).empty());
    CHECK(dual.total_cost == doctest::Approx(2.0));
}

TEST_CASE("bpr pipeline stays feasible and beats nothing below integer opt") {
    const Config& cfg = default_config();
    Xoshiro256 rng(401);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng.below(7));
        PackingInstance inst = random_bpr(rng, n);
        PackingSolution sol = solve_bpr(inst, cfg, derive_seed(500, trial));
        CAPTURE(trial);
        CHECK(check_packing(inst, sol).empty());
        BruteForceResult ref = brute_force_opt(inst);
        CHECK(sol.total_cost >= ref.integer_opt - 1e-9);
        // Coarse ceiling; the acceptance suite tracks the real gap curve.
        CHECK(sol.total_cost <= ref.integer_opt + 10.0);
    }
}

TEST_CASE("bpr pipeline is deterministic per seed") {
    const Config& cfg = default_config();
    Xoshiro256 rng(402);
    PackingInstance inst = random_bpr(rng, 6);
    PackingSolution a = solve_bpr(inst, cfg, 77);
    PackingSolution b = solve_bpr(inst, cfg, 77);
    CHECK(a.bins == b.bins);
    CHECK(a.rejected == b.rejected);
    CHECK(a.total_cost == doctest::Approx(b.total_cost));
}

TEST_CASE("train pipeline solves the pinned examples") {
    const Config& cfg = default_config();

    PackingInstance solo = with_positions({0.5}, {1.0});
    PackingSolution one = solve_train(solo, cfg, 21);
    CHECK(check_packing(solo, one).empty());
    CHECK(one.total_cost == doctest::Approx(1.0));
    REQUIRE(one.bins.size() == 1);
    CHECK(one.bins[0] == std::vector<int>{0});

    PackingInstance duo = with_positions({0.4, 0.4}, {1.0, 1.0});
    PackingSolution tour = solve_train(duo, cfg, 22);
    CHECK(check_packing(duo, tour).empty());
    CHECK(tour.total_cost == doctest::Approx(1.0));
}

TEST_CASE("train pipeline stays feasible above the integer optimum") {
    const Config& cfg = default_config();
    Xoshiro256 rng(403);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng.below(7));
        PackingInstance inst = random_train(rng, n);
        PackingSolution sol = solve_train(inst, cfg, derive_seed(600, trial));
        CAPTURE(trial);
        CHECK(check_packing(inst, sol).empty());
        BruteForceResult ref = brute_force_opt(inst);
        CHECK(sol.total_cost >= ref.integer_opt - 1e-9);
        CHECK(sol.total_cost <= ref.integer_opt + 10.0);
    }
}

TEST_CASE("prefix-count submatrices stay within the entropy budgets") {
    const Config& cfg = default_config();
    Xoshiro256 rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 4 + static_cast<int>(rng.below(5));
        Vec sizes;
        for (int i = 0; i < n; ++i) sizes.push_back(0.2 + 0.8 * rng.uniform01());
        std::sort(sizes.begin(), sizes.end(), std::greater<>());
        int m = 4 + static_cast<int>(rng.below(7));
        std::vector<Pattern> pool;
        for (int j = 0; j < m; ++j) {
            Pattern p;
            p.cost = 1.0;
            double load = 0.0;
            for (int i = 0; i < n; ++i) {
                double s = sizes[static_cast<size_t>(i)];
                if (load + s <= 1.0 && rng.below(2) == 0) {
                    p.items.push_back(i);
                    load += s;
                }
            }
            pool.push_back(std::move(p));
        }
        std::vector<int> kept;
        for (int i = 0; i < n; ++i) kept.push_back(i);
        CumulatedMatrix cum = cumulated_matrix(pool, kept, sizes, cfg.row_slack_c);

        double covered = 0.0;
        for (const Pattern& p : pool)
            for (int t : p.items) covered += sizes[static_cast<size_t>(t)];
        double h = exact_joint_entropy(cum.entries, cum.deltas);
        CAPTURE(trial);
        CHECK(h <= covered / 10.0 + 1e-9);
        CHECK(covered / 10.0 <= static_cast<double>(m) / 10.0 + 1e-9);

        double dmin = 1e300;
        for (double d : cum.deltas) dmin = std::min(dmin, d);
        if (cum.sigma > 0.0)
            CHECK(h <= entropy_budget_bound(cum, dmin, cfg.budget_scale_cl) + 1e-9);
    }
}
