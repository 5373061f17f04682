// Seeded experiment runner. A config names a command (round, color, bpr,
// train), an instance source (a file, or generator parameters), a run count
// and a master seed; the runner fans runs out over a worker pool with
// per-run seeds derived from (seed, run index), so parallel and serial
// execution emit byte-identical reports. Reports carry per-run records plus
// aggregates recomputable from them; nothing in a report depends on wall
// time.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entroround/binpack.hpp"
#include "entroround/config.hpp"
#include "entroround/rounding.hpp"

namespace entroround {

struct ExperimentConfig {
    std::string command;        // round | color | bpr | train
    std::string instance_path;  // when empty, instances are generated
    std::string dist = "uniform";
    int n = 8;   // generated instance size (items or rounding rows)
    int m = 8;   // columns for round and color commands
    int runs = 1;
    std::uint64_t seed = 1;
    RoundingBackend backend = RoundingBackend::Exhaustive;
    std::vector<double> lambda_grid;  // defaults per command when empty
    double tail_slack = 2.0;
    int threads = 0;  // 0: one per core, capped at the run count
    Config cfg = default_config();
};

struct RunRecord {
    int index = 0;
    bool pass = false;
    double value = 0.0;      // cost (pipelines) or worst drift ratio (round)
    double reference = 0.0;  // lp objective or allowed bound for the run
    std::string note;
};

struct Verdict {
    std::string name;
    bool pass = false;
};

struct TailCell {
    double lambda = 0.0;
    double freq = 0.0;
    double bound = 0.0;  // analytic curve value, slack not applied
};

struct Report {
    ExperimentConfig config;
    std::vector<RunRecord> records;
    double mean_value = 0.0;
    double max_value = 0.0;
    int pass_count = 0;
    std::vector<TailCell> tails;   // round and color commands
    Vec column_mean;               // color: empirical E[chi_j]
    std::vector<Verdict> verdicts;
    bool all_pass = false;

    std::string to_json() const;
};

Report run_experiment(const ExperimentConfig& config);

// Independent feasibility and cost check used on every solution before it
// reaches a report; shares only the data types with the solvers. Returns
// one message per violation, empty when clean.
std::vector<std::string> verify_solution(const PackingInstance& inst,
                                         const PackingSolution& sol,
                                         const std::string& kind);

}  // namespace entroround
