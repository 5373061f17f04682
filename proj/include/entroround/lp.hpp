// Column-generation covering LP: multiplicative-weights cover with an exact
// restricted-LP accelerator, the r-grid pattern LP driver, and sparsification
// of the result to a basic solution.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "entroround/matrix.hpp"
#include "entroround/oracles.hpp"
#include "entroround/pattern.hpp"

namespace entroround {

struct WeightedPattern {
    Pattern pattern;
    double weight = 0.0;
};

// Finite nonnegative combination of patterns. Stored weights are strictly
// positive; `objective` mirrors the recomputed cost to 1e-9.
struct SparseSolution {
    std::vector<WeightedPattern> entries;
    double objective = 0.0;
    bool sparsify_warning = false;  // set when a pivot was abandoned as degenerate

    double recompute_objective() const;
    Vec coverage(int n) const;
    // Merge duplicate patterns, drop nonpositive weights, refresh objective.
    void tidy();
};

// Cover n elements to (1-epsilon) with total pattern cost exactly r. rho
// bounds the width of a single oracle step: r / c_S <= rho for every pattern
// the oracle can return.
struct CoverProblem {
    int n = 0;
    double r = 0.0;
    double epsilon = 0.1;
    double rho = 1.0;
};

// Problem family handle: element count, the dual-separation oracle, and a
// positive lower bound on pattern costs (sets the width rho = r / min_cost).
struct PatternFamily {
    int n = 0;
    double min_cost = 1.0;
    std::function<OracleChoice(const Vec& y, double eps_prime)> oracle;
};

enum class MwStatus { Solved, Infeasible, IterationLimit };

struct MwResult {
    MwStatus status = MwStatus::IterationLimit;
    SparseSolution solution;  // best iterate on IterationLimit, empty on Infeasible
    long long oracle_calls = 0;
    // On Infeasible: a certified lower bound on the optimal cover cost, so a
    // budget scan can skip values that are infeasible for the same reason.
    double lower_bound = 0.0;
    std::string note;
};

// Knobs the contract leaves open. kmax_factor scales the oracle-call budget
// K_max = factor * (n + rho log^2 n + (rho/eps^2) log(n/eps)), logs base 2.
struct MwOptions {
    double kmax_factor = 10.0;
    bool accelerate = true;     // solve the pool LP exactly between price steps
    double improve_tol = 1e-7;  // column improves when its ratio exceeds 1 + tol
};

// Patterns collected so far, shared between budgets so later grid points can
// reuse the columns. Caches the exact restricted-LP solve; any add() or
// external mutation of `patterns` must be followed by invalidate().
struct PatternPool {
    std::vector<Pattern> patterns;

    bool lp_valid = false;
    bool lp_certified = false;
    double lp_value = 0.0;
    Vec lp_x;      // per pool column
    Vec lp_duals;  // per element
    bool no_improving_column = false;  // oracle verdict at lp_duals, sticky until add()

    // Returns true when the pattern was new.
    bool add(const Pattern& p);
    void invalidate();
    bool covers_all(int n) const;
};

// Either a solution with per-element coverage >= 1 - epsilon and cost exactly
// r, or Infeasible with a dual certificate that no full cover fits budget r
// (up to the oracle's (1 - eps') slack), or IterationLimit after K_max oracle
// calls with the best iterate attached. A caller-owned pool carries columns
// across calls; pass nullptr for a private one.
MwResult mw_cover(const CoverProblem& problem, const PatternFamily& family,
                  PatternPool* pool = nullptr, const MwOptions& options = {});

// Scan budgets r = delta/2, delta, 3*delta/2, ..., n (first feasible wins),
// scale the cover by 1/(1-eps) with eps = delta/(4n), clip weights to 1, and
// sparsify. Output: coverage >= 1 - 1e-9 per element, cost within delta of
// the fractional optimum, support <= n.
SparseSolution solve_pattern_lp(const PatternFamily& family, double delta);

// Remove support above n by null-space pivoting over the coverage matrix.
// Coverage is preserved to 1e-9, cost never increases. A pivot direction
// with no usable magnitude sets sparsify_warning and returns the input.
SparseSolution sparsify_to_basic(const SparseSolution& x, int n);

// Exact solver for min c'w subject to (coverage columns) * w >= 1, w >= 0.
// Dense two-phase simplex with Bland's rule; duals recovered from the final
// basis. `certified` means primal feasibility, dual feasibility, and strong
// duality were all verified on the output, so the result stands on its own
// regardless of how it was produced.
enum class SimplexStatus { Optimal, Infeasible, Stalled };

struct SimplexResult {
    SimplexStatus status = SimplexStatus::Stalled;
    Vec x;       // one weight per input column
    Vec duals;   // one price per element
    double value = 0.0;
    bool certified = false;
};

SimplexResult solve_covering_simplex(const std::vector<Pattern>& columns, int n);

}  // namespace entroround
