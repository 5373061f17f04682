// entroround: command line front end.
//
// Verbs: gen (random instances), solve-lp (fractional covering relaxation),
// bpr / train (end-to-end pipelines on one instance), round / color / bench
// (seeded experiment runner with report emission), verify (independent
// checker for an instance/solution pair).
//
// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage or IO error.
// Reports never contain wall time; timings go to stderr.
#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "entroround/harness.hpp"
#include "entroround/io.hpp"
#include "entroround/lp.hpp"
#include "entroround/oracles.hpp"

using namespace entroround;

namespace {

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::fputs(text.c_str(), stdout);
    else
        write_file(path, text);
}

int finish_experiment(const ExperimentConfig& config, const std::string& out) {
    auto t0 = std::chrono::steady_clock::now();
    Report rep = run_experiment(config);
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    emit(out, rep.to_json());
    std::fprintf(stderr, "%s: %d/%d runs passed, %zu verdicts, %s (%.3f s)\n",
                 config.command.c_str(), rep.pass_count, config.runs, rep.verdicts.size(),
                 rep.all_pass ? "pass" : "FAIL", dt.count());
    return rep.all_pass ? 0 : 1;
}

int run_single_pipeline(const std::string& kind, const std::string& instance_path,
                        std::uint64_t seed, const std::string& out) {
    LoadedInstance loaded = load_instance(instance_path);
    if (loaded.kind != kind) {
        std::fprintf(stderr, "%s: instance kind is %s\n", kind.c_str(), loaded.kind.c_str());
        return 2;
    }
    for (const std::string& notice : loaded.notices)
        std::fprintf(stderr, "notice: %s\n", notice.c_str());

    Config cfg = default_config();
    PackingSolution sol = kind == "train" ? solve_train(loaded.instance, cfg, seed)
                                          : solve_bpr(loaded.instance, cfg, seed);
    std::vector<std::string> bad = verify_solution(loaded.instance, sol, kind);
    for (const std::string& msg : bad) std::fprintf(stderr, "checker: %s\n", msg.c_str());
    if (!bad.empty()) return 1;

    emit(out, solution_to_json(sol));
    std::fprintf(stderr, "%s: cost %.6f over lp %.6f, %zu bins, %zu rejected\n", kind.c_str(),
                 sol.total_cost, sol.lp_objective, sol.bins.size(), sol.rejected.size());
    return 0;
}

int run_solve_lp(const std::string& instance_path, double delta, const std::string& out) {
    LoadedInstance loaded = load_instance(instance_path);
    const PackingInstance& inst = loaded.instance;

    PatternFamily family;
    family.n = inst.n();
    family.min_cost = 1.0;
    if (loaded.kind == "bpr") {
        for (double c : inst.rejection_costs) family.min_cost = std::min(family.min_cost, c);
        family.oracle = [&inst](const Vec& prices, double eps) {
            return bpr_oracle(prices, inst.sizes, inst.rejection_costs, eps);
        };
    } else if (loaded.kind == "train") {
        for (double p : inst.positions) family.min_cost = std::min(family.min_cost, p);
        family.oracle = [&inst](const Vec& prices, double eps) {
            return train_oracle(prices, inst.sizes, inst.positions, eps);
        };
    } else {
        family.oracle = [&inst](const Vec& prices, double eps) {
            OracleChoice choice;
            choice.pattern = knapsack_fptas(prices, inst.sizes, eps);
            choice.ratio = sum_prices(prices, choice.pattern.items);
            return choice;
        };
    }

    SparseSolution frac = solve_pattern_lp(family, delta);
    Vec cover = frac.coverage(inst.n());
    double worst_cover = 1.0;
    for (double c : cover) worst_cover = std::min(worst_cover, c);
    std::string text = "{\n  \"objective\": " + std::to_string(frac.objective) +
                       ",\n  \"support\": " + std::to_string(frac.entries.size()) +
                       ",\n  \"min_coverage\": " + std::to_string(worst_cover) +
                       ",\n  \"columns\": [\n";
    for (size_t k = 0; k < frac.entries.size(); ++k) {
        text += "    {\"weight\": " + std::to_string(frac.entries[k].weight) + ", \"items\": [";
        const std::vector<int>& items = frac.entries[k].pattern.items;
        for (size_t t = 0; t < items.size(); ++t)
            text += (t ? "," : "") + std::to_string(items[t]);
        text += "]}";
        text += k + 1 < frac.entries.size() ? ",\n" : "\n";
    }
    text += "  ]\n}\n";
    emit(out, text);
    std::fprintf(stderr, "solve-lp: objective %.6f, support %zu\n", frac.objective,
                 frac.entries.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy rounding toolkit"};
    app.require_subcommand(1);

    std::string kind = "bpr", dist = "uniform", instance_path, solution_path, out;
    std::string backend = "exhaustive", pipeline = "bpr";
    int n = 8, m = 12, runs = 1, threads = 0;
    std::uint64_t seed = 1;
    double delta = 0.05, tail_slack = 2.0;
    std::vector<double> lambdas;

    CLI::App* gen = app.add_subcommand("gen", "write a random instance");
    gen->add_option("--kind", kind, "bp, bpr or train")
        ->check(CLI::IsMember({"bp", "bpr", "train"}));
    gen->add_option("--n", n, "item count")->check(CLI::PositiveNumber);
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--dist", dist, "uniform, dyadic or clustered")
        ->check(CLI::IsMember({"uniform", "dyadic", "clustered"}));
    gen->add_option("--out", out, "output path, - for stdout");

    CLI::App* verify = app.add_subcommand("verify", "check a solution against an instance");
    verify->add_option("--instance", instance_path)->required();
    verify->add_option("--solution", solution_path)->required();

    CLI::App* bpr = app.add_subcommand("bpr", "solve bin packing with rejection");
    bpr->add_option("--instance", instance_path)->required();
    bpr->add_option("--seed", seed, "rounding seed");
    bpr->add_option("--out", out, "solution path, - for stdout");

    CLI::App* train = app.add_subcommand("train", "solve train delivery");
    train->add_option("--instance", instance_path)->required();
    train->add_option("--seed", seed, "rounding seed");
    train->add_option("--out", out, "solution path, - for stdout");

    CLI::App* lp = app.add_subcommand("solve-lp", "fractional covering relaxation only");
    lp->add_option("--instance", instance_path)->required();
    lp->add_option("--delta", delta, "additive objective tolerance")
        ->check(CLI::PositiveNumber);
    lp->add_option("--out", out, "output path, - for stdout");

    CLI::App* round = app.add_subcommand("round", "rounding experiment with tail report");
    round->add_option("--instance", instance_path, "rounding-kind instance file");
    round->add_option("--n", n, "generated tracked rows");
    round->add_option("--m", m, "generated columns");
    round->add_option("--runs", runs)->check(CLI::PositiveNumber);
    round->add_option("--seed", seed);
    round->add_option("--backend", backend)->check(CLI::IsMember({"exhaustive", "walk"}));
    round->add_option("--lambda", lambdas, "tail grid");
    round->add_option("--tail-slack", tail_slack);
    round->add_option("--threads", threads, "0 = one per core");
    round->add_option("--out", out, "report path, - for stdout");

    CLI::App* color = app.add_subcommand("color", "constraint-free walk experiment");
    color->add_option("--m", m, "columns");
    color->add_option("--runs", runs)->check(CLI::PositiveNumber);
    color->add_option("--seed", seed);
    color->add_option("--lambda", lambdas, "phase tail grid");
    color->add_option("--tail-slack", tail_slack);
    color->add_option("--threads", threads, "0 = one per core");
    color->add_option("--out", out, "report path, - for stdout");

    CLI::App* bench = app.add_subcommand("bench", "pipeline corpus experiment");
    bench->add_option("--pipeline", pipeline)->check(CLI::IsMember({"bpr", "train"}));
    bench->add_option("--instance", instance_path, "fixed instance instead of a corpus");
    bench->add_option("--n", n, "generated item count");
    bench->add_option("--dist", dist)->check(CLI::IsMember({"uniform", "dyadic", "clustered"}));
    bench->add_option("--runs", runs)->check(CLI::PositiveNumber);
    bench->add_option("--seed", seed);
    bench->add_option("--threads", threads, "0 = one per core");
    bench->add_option("--out", out, "report path, - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            PackingInstance inst = generate_instance(kind, n, seed, dist);
            emit(out, instance_to_json(kind, inst, dist == "dyadic"));
            return 0;
        }
        if (verify->parsed()) {
            LoadedInstance loaded = load_instance(instance_path);
            PackingSolution sol = load_solution(solution_path);
            std::vector<std::string> bad = verify_solution(loaded.instance, sol, loaded.kind);
            for (const std::string& msg : bad) std::printf("%s\n", msg.c_str());
            if (bad.empty()) std::printf("ok\n");
            return bad.empty() ? 0 : 1;
        }
        if (bpr->parsed()) return run_single_pipeline("bpr", instance_path, seed, out);
        if (train->parsed()) return run_single_pipeline("train", instance_path, seed, out);
        if (lp->parsed()) return run_solve_lp(instance_path, delta, out);

        ExperimentConfig config;
        config.instance_path = instance_path;
        config.dist = dist;
        config.n = n;
        config.m = m;
        config.runs = runs;
        config.seed = seed;
        config.backend =
            backend == "walk" ? RoundingBackend::SdpWalk : RoundingBackend::Exhaustive;
        config.lambda_grid = lambdas;
        config.tail_slack = tail_slack;
        config.threads = threads;
        if (round->parsed()) {
            config.command = "round";
        } else if (color->parsed()) {
            config.command = "color";
        } else {
            config.command = pipeline;
        }
        return finish_experiment(config, out);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "entroround: %s\n", ex.what());
        return 2;
    }
}
