#include "entroround/walk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "entroround/gfunc.hpp"
#include "entroround/sdp.hpp"

namespace entroround {

double walk_step_size(const Config& cfg, int nu, int m) {
    if (!cfg.walk_exact_schedule) return cfg.walk_step;
    const double nm = std::max(2.0, static_cast<double>(nu) * m);
    return 1.0 / (static_cast<double>(nu) * nu * std::sqrt(8.0 * std::log(nm)));
}

long walk_budget(const Config& cfg, int m, double step) {
    const double lg = std::log2(std::max(2.0, static_cast<double>(m)));
    const double raw = 20.0 * (16.0 / (step * step)) * lg;
    if (raw >= static_cast<double>(cfg.walk_budget_cap)) return cfg.walk_budget_cap;
    return std::max(1L, static_cast<long>(raw));
}

namespace {

struct LedgerAccumulator {
    int phase = -1;
    long iterations = 0;
    std::vector<double> sums;  // one per soft row

    void close_into(std::vector<PhaseEntry>& out, const Vec& mu) {
        if (phase < 0) return;
        for (size_t i = 0; i < sums.size(); ++i) {
            PhaseEntry e;
            e.phase = phase;
            e.soft_row = static_cast<int>(i);
            e.realized = std::abs(sums[i]);
            e.allowance = g_inverse(mu[i] * std::pow(2.0, phase) / 10.0) *
                          std::pow(2.0, (phase + 1) / 2.0);
            e.iterations = iterations;
            out.push_back(e);
        }
        phase = -1;
        iterations = 0;
        std::fill(sums.begin(), sums.end(), 0.0);
    }
};

}  // namespace

WalkResult run_sdp_walk(const DenseMatrix& a, const Vec& delta, const DenseMatrix& b,
                        const Vec& mu, const Config& cfg, std::uint64_t seed, int m_cols) {
    GaussianSource gauss(seed);
    return run_sdp_walk(a, delta, b, mu, cfg, gauss, m_cols);
}

WalkResult run_sdp_walk(const DenseMatrix& a, const Vec& delta, const DenseMatrix& b,
                        const Vec& mu, const Config& cfg, GaussianSource& gauss, int m_cols) {
    if (a.rows > 0 && a.cols != m_cols)
        throw std::invalid_argument("run_sdp_walk: tracked block width mismatch");
    if (b.rows > 0 && b.cols != m_cols)
        throw std::invalid_argument("run_sdp_walk: soft block width mismatch");
    const int m = m_cols;
    if (m < 1) throw std::invalid_argument("run_sdp_walk: no columns");
    if (static_cast<int>(delta.size()) != a.rows || static_cast<int>(mu.size()) != b.rows)
        throw std::invalid_argument("run_sdp_walk: bound vector length mismatch");

    const int nu = std::max({a.rows + b.rows, m, 2});
    const double band = 1.0 / (static_cast<double>(nu) * nu);
    const double step = walk_step_size(cfg, nu, m);
    const long budget = walk_budget(cfg, m, step);

    WalkResult out;
    out.chi = PartialColoring(m);
    out.trace.freeze_iteration.assign(static_cast<size_t>(m), -1);

    std::vector<double> chi(static_cast<size_t>(m), 0.0);
    std::vector<int> active(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) active[static_cast<size_t>(j)] = j;

    LedgerAccumulator ledger;
    ledger.sums.assign(static_cast<size_t>(b.rows), 0.0);

    // The feasibility problem depends only on the active set, so one solve is
    // reused until the next freeze event.
    SdpSpec spec;
    VectorAssignment vectors;
    bool have_solution = false;

    std::vector<double> g;
    std::vector<double> gamma;

    long t = 0;
    while (!active.empty() && t < budget) {
        const int dim = static_cast<int>(active.size());

        if (!have_solution) {
            spec = build_coloring_sdp(a, delta, b, mu, active);
            SdpResult sol = solve_sdp_feasibility(spec, cfg);
            ++out.trace.sdp_solves;
            if (!sol.converged) {
                Config relaxed = cfg;
                relaxed.sdp_tol = cfg.sdp_tol * 2.0;
                sol = solve_sdp_feasibility(spec, relaxed);
                ++out.trace.sdp_solves;
            }
            const SdpResiduals res = check_sdp_residuals(spec, sol.vectors);
            if (!sol.converged || !res.ok(8.0 * cfg.sdp_tol)) {
                out.trace.note = "vector program failed to converge";
                out.trace.iterations = t;
                ledger.close_into(out.trace.phases, mu);
                for (int j = 0; j < m; ++j) {
                    const double v = chi[static_cast<size_t>(j)];
                    out.chi.v[static_cast<size_t>(j)] =
                        static_cast<std::int8_t>(v >= 1.0 ? 1 : v <= -1.0 ? -1 : 0);
                }
                return out;
            }
            vectors = sol.vectors;
            have_solution = true;
        }

        // Phase bookkeeping keyed by floor(log2(active count)).
        const int phase = std::bit_width(static_cast<unsigned>(dim)) - 1;
        if (ledger.phase != phase) {
            ledger.close_into(out.trace.phases, mu);
            ledger.phase = phase;
        }

        g.resize(static_cast<size_t>(dim));
        for (int d = 0; d < dim; ++d) g[static_cast<size_t>(d)] = gauss.next();

        gamma.assign(static_cast<size_t>(dim), 0.0);
        for (int j = 0; j < dim; ++j) {
            const double* col = vectors.v.data() + static_cast<size_t>(j) * dim;
            double dot = 0.0;
            for (int d = 0; d < dim; ++d) dot += col[d] * g[static_cast<size_t>(d)];
            gamma[static_cast<size_t>(j)] = step * dot;
        }

        // Apply the move with clip-at-freeze; the realized deltas (clip
        // included) feed the soft-row ledger so phase sums equal the true
        // movement of B_i chi.
        bool froze_any = false;
        std::vector<int> still;
        still.reserve(active.size());
        std::vector<double> applied(static_cast<size_t>(dim), 0.0);
        for (int j = 0; j < dim; ++j) {
            const int col = active[static_cast<size_t>(j)];
            const double before = chi[static_cast<size_t>(col)];
            double v = before + gamma[static_cast<size_t>(j)];
            if (v >= 1.0 - band) {
                v = 1.0;
                out.trace.freeze_iteration[static_cast<size_t>(col)] = t;
                froze_any = true;
            } else if (v <= -1.0 + band) {
                v = -1.0;
                out.trace.freeze_iteration[static_cast<size_t>(col)] = t;
                froze_any = true;
            } else {
                still.push_back(col);
            }
            chi[static_cast<size_t>(col)] = v;
            applied[static_cast<size_t>(j)] = v - before;
        }
        for (int i = 0; i < b.rows; ++i) {
            double inc = 0.0;
            for (int j = 0; j < dim; ++j) inc += b.at(i, active[static_cast<size_t>(j)]) *
                                                 applied[static_cast<size_t>(j)];
            ledger.sums[static_cast<size_t>(i)] += inc;
        }
        ledger.iterations += 1;
        ++t;
        if (froze_any) {
            active.swap(still);
            have_solution = false;
        }
    }

    ledger.close_into(out.trace.phases, mu);
    out.trace.iterations = t;
    out.trace.success = active.empty();
    out.success = out.trace.success;
    for (int j = 0; j < m; ++j) {
        const double v = chi[static_cast<size_t>(j)];
        out.chi.v[static_cast<size_t>(j)] = static_cast<std::int8_t>(v >= 1.0 ? 1 : v <= -1.0 ? -1 : 0);
    }
    if (!out.success && out.trace.note.empty()) out.trace.note = "iteration budget exhausted";
    return out;
}

std::vector<PhaseCheckRow> phase_ledger_check(const std::vector<WalkTrace>& traces,
                                              const std::vector<double>& lambda_grid) {
    std::vector<PhaseCheckRow> rows;
    rows.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        PhaseCheckRow r;
        r.lambda = lambda;
        for (const auto& tr : traces)
            for (const auto& e : tr.phases) {
                ++r.total;
                if (e.realized > lambda * e.allowance) ++r.exceed;
            }
        r.freq = r.total ? static_cast<double>(r.exceed) / static_cast<double>(r.total) : 0.0;
        r.bound = 3.0 * std::pow(2.0, -lambda / 6.0);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace entroround
