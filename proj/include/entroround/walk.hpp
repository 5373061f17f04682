// Random-walk full coloring driven by repeated vector-program solves.
//
// Starting from chi = 0, each step samples a standard Gaussian, moves every
// active coordinate along its assigned vector, and freezes coordinates that
// reach the +-1 band. Freezing is monotone, |chi_j| <= 1 throughout, and the
// per-phase soft-row increments are logged for tail checks.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entroround/config.hpp"
#include "entroround/matrix.hpp"
#include "entroround/rng.hpp"

namespace entroround {

// One closed phase r (active count in [2^r, 2^{r+1})) for one soft row:
// realized |sum of increments| against the phase allowance
// g_inverse(mu_i 2^r / 10) * 2^{(r+1)/2}.
struct PhaseEntry {
    int phase = 0;
    int soft_row = 0;
    double realized = 0.0;
    double allowance = 0.0;
    long iterations = 0;
};

struct WalkTrace {
    std::vector<long> freeze_iteration;  // per column; -1 while unfrozen
    std::vector<PhaseEntry> phases;
    long iterations = 0;
    int sdp_solves = 0;
    bool success = false;
    std::string note;
};

struct WalkResult {
    PartialColoring chi;
    bool success = false;
    WalkTrace trace;
};

// Full coloring of the m_cols columns of [a; b]. Tracked rows are capped at
// delta_i, soft rows at g_inverse(mu_i |J|/10) sqrt(|J|) for the current
// active count. m_cols is explicit so row-free instances still have a width.
// Succeeds when every coordinate froze within the iteration budget.
WalkResult run_sdp_walk(const DenseMatrix& a, const Vec& delta, const DenseMatrix& b,
                        const Vec& mu, const Config& cfg, std::uint64_t seed, int m_cols);

// Same walk fed from an external Gaussian stream (mirroring tests).
WalkResult run_sdp_walk(const DenseMatrix& a, const Vec& delta, const DenseMatrix& b,
                        const Vec& mu, const Config& cfg, GaussianSource& gauss, int m_cols);

struct PhaseCheckRow {
    double lambda = 0.0;
    long exceed = 0;
    long total = 0;
    double freq = 0.0;
    double bound = 0.0;  // 3 * 2^{-lambda/6}
};

// Exceedance frequency of realized phase increments over lambda * allowance,
// pooled across traces, against the 3 * 2^{-lambda/6} curve.
std::vector<PhaseCheckRow> phase_ledger_check(const std::vector<WalkTrace>& traces,
                                              const std::vector<double>& lambda_grid);

// Effective step size and iteration budget for m columns and nu = row count
// scale; desk schedule unless cfg.walk_exact_schedule.
double walk_step_size(const Config& cfg, int nu, int m);
long walk_budget(const Config& cfg, int m, double step);

}  // namespace entroround
