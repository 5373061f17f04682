#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <stdexcept>
#include <string>

#include "entroround/harness.hpp"
#include "entroround/io.hpp"

using namespace entroround;

namespace {

PackingInstance bpr_instance() {
    PackingInstance inst;
    inst.sizes = {0.6, 0.5, 0.3};
    inst.rejection_costs = {0.9, 0.8, 0.2};
    return inst;
}

PackingSolution clean_solution() {
    PackingSolution sol;
    sol.bins = {{0, 2}, {1}};
    sol.rejected = {};
    sol.total_cost = 2.0;
    return sol;
}

}  // namespace

TEST_CASE("checker accepts a clean solution") {
    CHECK(verify_solution(bpr_instance(), clean_solution(), "bpr").empty());
}

TEST_CASE("checker flags each violation kind") {
    PackingInstance inst = bpr_instance();

    PackingSolution overfull;
    overfull.bins = {{0, 1}, {2}};
    overfull.total_cost = 2.0;
    auto msgs = verify_solution(inst, overfull, "bpr");
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].find("overfull") != std::string::npos);

    PackingSolution missing;
    missing.bins = {{0, 2}};
    missing.total_cost = 1.0;
    msgs = verify_solution(inst, missing, "bpr");
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].find("unplaced") != std::string::npos);

    PackingSolution twice;
    twice.bins = {{0, 2}, {1}, {2}};
    twice.total_cost = 3.0;
    msgs = verify_solution(inst, twice, "bpr");
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].find("more than once") != std::string::npos);

    PackingSolution empty_bin;
    empty_bin.bins = {{0, 2}, {1}, {}};
    empty_bin.total_cost = 3.0;
    msgs = verify_solution(inst, empty_bin, "bpr");
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].find("empty") != std::string::npos);

    PackingSolution bad_reject;
    bad_reject.bins = {{0, 2}};
    bad_reject.rejected = {1};
    bad_reject.total_cost = 1.0;  // bin only; non-bpr kinds add no rejection cost
    msgs = verify_solution(inst, bad_reject, "bp");
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].find("rejected but kind") != std::string::npos);

    PackingSolution bad_cost = clean_solution();
    bad_cost.total_cost = 9.0;
    msgs = verify_solution(inst, bad_cost, "bpr");
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].find("total_cost mismatch") != std::string::npos);

    PackingSolution out_of_range;
    out_of_range.bins = {{0, 1, 2, 7}};
    out_of_range.total_cost = 1.0;
    msgs = verify_solution(inst, out_of_range, "bpr");
    CHECK(!msgs.empty());
    CHECK(msgs[0].find("out of range") != std::string::npos);
}

TEST_CASE("checker recomputes train tour costs from positions") {
    PackingInstance inst;
    inst.sizes = {0.6, 0.5, 0.3};
    inst.positions = {0.9, 0.4, 0.7};
    PackingSolution sol;
    sol.bins = {{0, 2}, {1}};
    sol.total_cost = 0.9 + 0.4;
    CHECK(verify_solution(inst, sol, "train").empty());
    sol.total_cost = 2.0;  // bin counting would give this
    CHECK(!verify_solution(inst, sol, "train").empty());
}

TEST_CASE("round experiment passes and reports tails at the default grid") {
    ExperimentConfig config;
    config.command = "round";
    config.n = 4;
    config.m = 10;
    config.runs = 60;
    config.seed = 21;
    Report rep = run_experiment(config);
    CHECK(rep.records.size() == 60);
    CHECK(rep.pass_count == 60);
    CHECK(rep.all_pass);
    REQUIRE(rep.tails.size() == 2);
    CHECK(rep.tails[0].lambda == 1.0);
    CHECK(rep.tails[1].lambda == 2.0);
    CHECK(rep.max_value <= 1.0);  // worst drift ratio stays under the bound
    for (const RunRecord& rec : rep.records) CHECK(rec.reference == 1.0);
}

TEST_CASE("color experiment freezes and bounds the column bias") {
    ExperimentConfig config;
    config.command = "color";
    config.m = 8;
    config.runs = 80;
    config.seed = 3;
    Report rep = run_experiment(config);
    CHECK(rep.pass_count == 80);
    CHECK(rep.all_pass);
    REQUIRE(rep.column_mean.size() == 8);
    for (double v : rep.column_mean) CHECK(std::abs(v) <= 4.0 / std::sqrt(80.0));
    REQUIRE(rep.tails.size() == 2);
    CHECK(rep.tails[0].lambda == 6.0);
}

TEST_CASE("pipeline corpora pass the checker and the gap verdicts") {
    ExperimentConfig config;
    config.command = "bpr";
    config.n = 6;
    config.runs = 12;
    config.seed = 17;
    Report rep = run_experiment(config);
    CHECK(rep.pass_count == 12);
    CHECK(rep.all_pass);
    for (const RunRecord& rec : rep.records) CHECK(rec.value >= rec.reference - 1e-9);

    config.command = "train";
    config.n = 5;
    config.runs = 10;
    Report tr = run_experiment(config);
    CHECK(tr.pass_count == 10);
    CHECK(tr.all_pass);
}

TEST_CASE("reports are byte identical across schedules and reruns") {
    ExperimentConfig config;
    config.command = "bpr";
    config.n = 6;
    config.runs = 8;
    config.seed = 40;
    config.threads = 1;
    std::string serial = run_experiment(config).to_json();
    config.threads = 4;
    CHECK(run_experiment(config).to_json() == serial);
    CHECK(run_experiment(config).to_json() == serial);

    ExperimentConfig walk;
    walk.command = "color";
    walk.m = 8;
    walk.runs = 30;
    walk.seed = 12;
    walk.threads = 3;
    std::string first = run_experiment(walk).to_json();
    walk.threads = 1;
    CHECK(run_experiment(walk).to_json() == first);
}

TEST_CASE("experiments run a fixed instance from a file") {
    std::string path = "/tmp/entroround_test_fixed.json";
    PackingInstance inst = generate_instance("bpr", 7, 99, "uniform");
    write_file(path, instance_to_json("bpr", inst, false));

    ExperimentConfig config;
    config.command = "bpr";
    config.instance_path = path;
    config.runs = 5;
    config.seed = 8;
    Report rep = run_experiment(config);
    CHECK(rep.pass_count == 5);
    // same instance, so the lp objective is the same in every record
    for (const RunRecord& rec : rep.records)
        CHECK(rec.reference == rep.records[0].reference);

    config.command = "train";
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("config errors are rejected up front") {
    ExperimentConfig config;
    config.command = "nope";
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
    config.command = "round";
    config.runs = 0;
    CHECK_THROWS_AS(run_experiment(config), std::invalid_argument);
}
