// Covering LP built around column generation: a multiplicative-weights price
// loop supplies columns, an exact simplex solve over the collected pool gives
// early termination and dual certificates, and null-space pivoting sparsifies
// the final cover to a basic solution.
#include "entroround/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace entroround {

namespace {

constexpr double kCostTol = 1e-12;     // positivity threshold for costs/weights
constexpr double kPivotTol = 1e-9;     // simplex pivot and reduced-cost cutoff
constexpr double kCertTol = 1e-7;      // self-certification slack
constexpr double kDegenerateTol = 1e-12;
constexpr int kSimplexCap = 100000;    // combined pivot budget, both phases

void require_column(const Pattern& p, int n) {
    require_sorted_items(p, n);
    if (!(p.cost > kCostTol) || p.cost > 1.0 + 1e-9)
        throw std::invalid_argument("pattern cost must lie in (0, 1]");
}

Vec pattern_coverage(const Pattern& p, int n) {
    Vec col(static_cast<size_t>(n), 0.0);
    for (int i : p.items) col[static_cast<size_t>(i)] += 1.0;
    return col;
}

double min_entry(const Vec& v) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : v) m = std::min(m, x);
    return m;
}

}  // namespace

double SparseSolution::recompute_objective() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * e.pattern.cost;
    return s;
}

Vec SparseSolution::coverage(int n) const {
    Vec cov(static_cast<size_t>(n), 0.0);
    for (const auto& e : entries) {
        require_sorted_items(e.pattern, n);
        for (int i : e.pattern.items) cov[static_cast<size_t>(i)] += e.weight;
    }
    return cov;
}

void SparseSolution::tidy() {
    std::vector<WeightedPattern> merged;
    for (const auto& e : entries) {
        if (!(e.weight > 1e-15)) continue;
        bool found = false;
        for (auto& m : merged)
            if (m.pattern == e.pattern) {
                m.weight += e.weight;
                found = true;
                break;
            }
        if (!found) merged.push_back(e);
    }
    entries = std::move(merged);
    objective = recompute_objective();
}

bool PatternPool::add(const Pattern& p) {
    for (const auto& q : patterns)
        if (q == p) return false;
    patterns.push_back(p);
    invalidate();
    return true;
}

void PatternPool::invalidate() {
    lp_valid = false;
    lp_certified = false;
    no_improving_column = false;
}

bool PatternPool::covers_all(int n) const {
    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (const auto& p : patterns)
        for (int i : p.items) seen[static_cast<size_t>(i)] = 1;
    for (char c : seen)
        if (!c) return false;
    return true;
}

SimplexResult solve_covering_simplex(const std::vector<Pattern>& columns, int n) {
    if (n < 1) throw std::invalid_argument("covering simplex: need at least one element");
    const int p = static_cast<int>(columns.size());
    for (const auto& c : columns) require_column(c, n);

    // Equality form: [cov | -I | I] [x s a]' = 1. Artificials start basic.
    const int ncols = p + 2 * n;
    DenseMatrix orig(n, ncols);
    for (int j = 0; j < p; ++j)
        for (int i : columns[static_cast<size_t>(j)].items) orig.at(i, j) += 1.0;
    for (int i = 0; i < n; ++i) {
        orig.at(i, p + i) = -1.0;
        orig.at(i, p + n + i) = 1.0;
    }

    DenseMatrix t = orig;
    Vec rhs(static_cast<size_t>(n), 1.0);
    std::vector<int> basis(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) basis[static_cast<size_t>(i)] = p + n + i;

    int pivots = 0;
    SimplexResult out;

    // One Bland-rule phase over the current cost vector. Columns at or past
    // `limit` are barred from entering. Returns false on a blown pivot cap.
    auto run_phase = [&](const Vec& cost, int limit) -> bool {
        while (pivots < kSimplexCap) {
            Vec cb(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) cb[static_cast<size_t>(i)] = cost[static_cast<size_t>(basis[static_cast<size_t>(i)])];
            int enter = -1;
            for (int j = 0; j < limit && enter < 0; ++j) {
                double red = cost[static_cast<size_t>(j)];
                for (int i = 0; i < n; ++i) red -= cb[static_cast<size_t>(i)] * t.at(i, j);
                if (red < -kPivotTol) enter = j;
            }
            if (enter < 0) return true;
            int leave = -1, leave_basis = std::numeric_limits<int>::max();
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                if (t.at(i, enter) <= kPivotTol) continue;
                double ratio = rhs[static_cast<size_t>(i)] / t.at(i, enter);
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && basis[static_cast<size_t>(i)] < leave_basis)) {
                    best = ratio;
                    leave = i;
                    leave_basis = basis[static_cast<size_t>(i)];
                }
            }
            if (leave < 0) return false;  // cannot happen with positive costs; bail out
            const double piv = t.at(leave, enter);
            for (int j = 0; j < ncols; ++j) t.at(leave, j) /= piv;
            rhs[static_cast<size_t>(leave)] /= piv;
            for (int i = 0; i < n; ++i) {
                if (i == leave) continue;
                const double f = t.at(i, enter);
                if (f == 0.0) continue;
                for (int j = 0; j < ncols; ++j) t.at(i, j) -= f * t.at(leave, j);
                rhs[static_cast<size_t>(i)] -= f * rhs[static_cast<size_t>(leave)];
            }
            basis[static_cast<size_t>(leave)] = enter;
            ++pivots;
        }
        return false;
    };

    Vec phase1(static_cast<size_t>(ncols), 0.0);
    for (int j = p + n; j < ncols; ++j) phase1[static_cast<size_t>(j)] = 1.0;
    if (!run_phase(phase1, ncols)) return out;  // Stalled

    double infeas = 0.0;
    for (int i = 0; i < n; ++i)
        if (basis[static_cast<size_t>(i)] >= p + n) infeas += rhs[static_cast<size_t>(i)];
    if (infeas > kCertTol) {
        out.status = SimplexStatus::Infeasible;
        return out;
    }

    // Swap lingering zero-level artificials for real columns where possible.
    for (int i = 0; i < n; ++i) {
        if (basis[static_cast<size_t>(i)] < p + n) continue;
        for (int j = 0; j < p + n; ++j) {
            if (std::abs(t.at(i, j)) <= kPivotTol) continue;
            const double piv = t.at(i, j);
            for (int jj = 0; jj < ncols; ++jj) t.at(i, jj) /= piv;
            rhs[static_cast<size_t>(i)] /= piv;
            for (int ii = 0; ii < n; ++ii) {
                if (ii == i) continue;
                const double f = t.at(ii, j);
                if (f == 0.0) continue;
                for (int jj = 0; jj < ncols; ++jj) t.at(ii, jj) -= f * t.at(i, jj);
                rhs[static_cast<size_t>(ii)] -= f * rhs[static_cast<size_t>(i)];
            }
            basis[static_cast<size_t>(i)] = j;
            ++pivots;
            break;
        }
    }

    Vec phase2(static_cast<size_t>(ncols), 0.0);
    for (int j = 0; j < p; ++j) phase2[static_cast<size_t>(j)] = columns[static_cast<size_t>(j)].cost;
    if (!run_phase(phase2, p + n)) return out;  // Stalled

    out.status = SimplexStatus::Optimal;
    out.x.assign(static_cast<size_t>(p), 0.0);
    for (int i = 0; i < n; ++i)
        if (basis[static_cast<size_t>(i)] < p)
            out.x[static_cast<size_t>(basis[static_cast<size_t>(i)])] = std::max(0.0, rhs[static_cast<size_t>(i)]);
    out.value = 0.0;
    for (int j = 0; j < p; ++j) out.value += phase2[static_cast<size_t>(j)] * out.x[static_cast<size_t>(j)];

    // Duals from the original basis matrix: solve B' y = c_B.
    Eigen::MatrixXd b(n, n);
    Eigen::VectorXd cb(n);
    for (int i = 0; i < n; ++i) {
        const int col = basis[static_cast<size_t>(i)];
        for (int row = 0; row < n; ++row) b(row, i) = orig.at(row, col);
        cb(i) = phase2[static_cast<size_t>(col)];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b.transpose());
    out.duals.assign(static_cast<size_t>(n), 0.0);
    if (lu.isInvertible()) {
        Eigen::VectorXd y = lu.solve(cb);
        // Snap roundoff negatives to zero; anything beyond tolerance would
        // push the duality gap check below past its limit anyway.
        for (int i = 0; i < n; ++i) out.duals[static_cast<size_t>(i)] = std::max(0.0, y(i));
    }

    // The result certifies itself or it does not count: primal feasibility,
    // dual feasibility, and matching objectives.
    bool ok = lu.isInvertible();
    Vec cov(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < p && ok; ++j) {
        if (out.x[static_cast<size_t>(j)] < -kPivotTol) ok = false;
        for (int i : columns[static_cast<size_t>(j)].items)
            cov[static_cast<size_t>(i)] += out.x[static_cast<size_t>(j)];
    }
    for (int i = 0; i < n && ok; ++i) {
        if (cov[static_cast<size_t>(i)] < 1.0 - kCertTol) ok = false;
        if (out.duals[static_cast<size_t>(i)] < -kPivotTol) ok = false;
    }
    double dual_value = 0.0;
    for (int i = 0; i < n; ++i) dual_value += out.duals[static_cast<size_t>(i)];
    for (int j = 0; j < p && ok; ++j) {
        double priced = 0.0;
        for (int i : columns[static_cast<size_t>(j)].items) priced += out.duals[static_cast<size_t>(i)];
        if (priced > columns[static_cast<size_t>(j)].cost + kCertTol) ok = false;
    }
    if (std::abs(dual_value - out.value) > 1e-6 * (1.0 + std::abs(out.value))) ok = false;
    out.certified = ok;
    return out;
}

MwResult mw_cover(const CoverProblem& problem, const PatternFamily& family, PatternPool* pool,
                  const MwOptions& options) {
    const int n = problem.n;
    if (n < 1) throw std::invalid_argument("mw_cover: need at least one element");
    if (!(problem.r > 0.0)) throw std::invalid_argument("mw_cover: budget must be positive");
    if (!(problem.epsilon > 0.0) || problem.epsilon >= 1.0)
        throw std::invalid_argument("mw_cover: epsilon must lie in (0, 1)");
    if (problem.rho < 1.0) throw std::invalid_argument("mw_cover: width bound must be >= 1");
    if (!family.oracle) throw std::invalid_argument("mw_cover: family has no oracle");

    const double r = problem.r;
    const double eps = problem.epsilon;
    const double eps_prime = eps / 2.0;
    const double eta = std::log(static_cast<double>(n)) / eps;
    const double tau = eps / (4.0 * problem.rho);
    const double lg_n = std::log2(static_cast<double>(n));
    double kmax_d = options.kmax_factor *
                    (n + problem.rho * lg_n * lg_n +
                     (problem.rho / (eps * eps)) * std::log2(static_cast<double>(n) / eps));
    kmax_d = std::min(kmax_d, 4e18);
    const long long kmax = std::max<long long>(16, static_cast<long long>(std::ceil(kmax_d)));

    PatternPool scratch;
    if (!pool) pool = &scratch;

    MwResult res;
    // Running combination x <- (1 - tau) x + tau (r / c_S) e_S, stored as a
    // global multiplier over raw weights, plus the uniform average of the
    // same steps. Both are candidate covers.
    std::vector<double> wx(pool->patterns.size(), 0.0);
    std::vector<double> wavg(pool->patterns.size(), 0.0);
    double mult = 1.0;
    double steps = 0.0;
    Vec cov_x(static_cast<size_t>(n), 0.0);
    Vec cum_cov(static_cast<size_t>(n), 0.0);

    auto grow = [&]() {
        wx.resize(pool->patterns.size(), 0.0);
        wavg.resize(pool->patterns.size(), 0.0);
    };
    grow();

    // Build a solution from raw weights scaled so the cost lands exactly on r.
    auto assemble = [&](const std::vector<double>& raw, double factor) {
        SparseSolution s;
        double cost = 0.0;
        for (size_t j = 0; j < raw.size(); ++j)
            cost += raw[j] * factor * pool->patterns[j].cost;
        if (cost > kCostTol) {
            const double scale = r / cost;
            for (size_t j = 0; j < raw.size(); ++j) {
                const double w = raw[j] * factor * scale;
                if (w > 1e-15) s.entries.push_back({pool->patterns[j], w});
            }
        }
        s.tidy();
        return s;
    };

    auto finish_limit = [&]() {
        SparseSolution a = assemble(wx, mult);
        SparseSolution b = steps > 0.0 ? assemble(wavg, 1.0 / steps) : SparseSolution{};
        const double amin = a.entries.empty() ? -1.0 : min_entry(a.coverage(n));
        const double bmin = b.entries.empty() ? -1.0 : min_entry(b.coverage(n));
        res.status = MwStatus::IterationLimit;
        res.solution = amin >= bmin ? std::move(a) : std::move(b);
        res.note = "oracle budget exhausted; attaching the best iterate";
        return res;
    };

    while (true) {
        if (options.accelerate && pool->covers_all(n)) {
            if (!pool->lp_valid) {
                SimplexResult ex = solve_covering_simplex(pool->patterns, n);
                pool->lp_valid = true;
                pool->lp_certified = ex.status == SimplexStatus::Optimal && ex.certified;
                if (pool->lp_certified) {
                    pool->lp_value = ex.value;
                    pool->lp_x = ex.x;
                    pool->lp_duals = ex.duals;
                    pool->no_improving_column = false;
                }
            }
            if (pool->lp_certified) {
                if (pool->lp_value <= r + 1e-12) {
                    // Pad the exact cover up to cost r; coverage only grows.
                    std::vector<double> raw(pool->lp_x.begin(), pool->lp_x.end());
                    res.status = MwStatus::Solved;
                    res.solution = assemble(raw, 1.0);
                    res.note = "exact cover over the collected pool";
                    return res;
                }
                // Converged pool value v bounds the optimum: no column beats
                // ratio 1 + slack at the pool duals, so OPT >= (1-eps')v/(1+slack).
                const double slack =
                    std::max(options.improve_tol,
                             kCertTol / std::max(family.min_cost, kCostTol));
                const double cg_bound =
                    std::min((1.0 - eps_prime) * pool->lp_value / (1.0 + slack),
                             static_cast<double>(n) + 1.0);
                if (pool->no_improving_column) {
                    res.status = MwStatus::Infeasible;
                    res.lower_bound = cg_bound;
                    res.note = "pool optimum exceeds the budget and the oracle finds no "
                               "improving column";
                    return res;
                }
                if (res.oracle_calls < kmax) {
                    OracleChoice probe = family.oracle(pool->lp_duals, eps_prime);
                    ++res.oracle_calls;
                    if (probe.ratio > 1.0 + options.improve_tol && !probe.pattern.items.empty()) {
                        require_column(probe.pattern, n);
                        if (pool->add(probe.pattern)) {
                            grow();
                            continue;  // re-solve with the new column
                        }
                        // A repeat column only means dual-feasibility slack on a
                        // cheap pattern; the pool value is still (1-eps')-tight.
                    }
                    pool->no_improving_column = true;
                    res.status = MwStatus::Infeasible;
                    res.lower_bound = cg_bound;
                    res.note = "pool optimum exceeds the budget and the oracle finds no "
                               "improving column";
                    return res;
                }
            }
        }

        if (res.oracle_calls >= kmax) return finish_limit();

        // Price step: softmax over coverage shortfall of the running iterate.
        Vec y(static_cast<size_t>(n));
        const double shift = min_entry(cov_x);
        double z = 0.0;
        for (int i = 0; i < n; ++i) {
            y[static_cast<size_t>(i)] = std::exp(-eta * (cov_x[static_cast<size_t>(i)] - shift));
            z += y[static_cast<size_t>(i)];
        }
        for (double& v : y) v /= z;

        OracleChoice choice = family.oracle(y, eps_prime);
        ++res.oracle_calls;
        const double ratio = choice.ratio;
        // Scaled prices are dual-feasible, so sum(y) / ratio bounds the optimum
        // from below up to the oracle slack.
        if (ratio <= 0.0 || (1.0 - eps_prime) / ratio > r + 1e-12) {
            res.status = MwStatus::Infeasible;
            res.lower_bound = ratio > 0.0
                                  ? std::min((1.0 - eps_prime) / ratio,
                                             static_cast<double>(n) + 1.0)
                                  : static_cast<double>(n) + 1.0;
            res.note = "price certificate: dual value exceeds the budget";
            return res;
        }
        require_column(choice.pattern, n);
        if (pool->add(choice.pattern)) grow();
        size_t idx = 0;
        while (!(pool->patterns[idx] == choice.pattern)) ++idx;

        const double w = r / choice.pattern.cost;
        mult *= 1.0 - tau;
        if (mult < 1e-280) {  // fold the multiplier back before it underflows
            for (double& v : wx) v *= mult;
            mult = 1.0;
        }
        wx[idx] += tau * w / mult;
        for (double& v : cov_x) v *= 1.0 - tau;
        for (int i : choice.pattern.items) cov_x[static_cast<size_t>(i)] += tau * w;
        wavg[idx] += w;
        for (int i : choice.pattern.items) cum_cov[static_cast<size_t>(i)] += w;
        steps += 1.0;

        if (min_entry(cov_x) >= 1.0 - eps) {
            res.status = MwStatus::Solved;
            res.solution = assemble(wx, mult);
            res.note = "price iterate reached target coverage";
            return res;
        }
        if (min_entry(cum_cov) / steps >= 1.0 - eps) {
            res.status = MwStatus::Solved;
            res.solution = assemble(wavg, 1.0 / steps);
            res.note = "averaged iterate reached target coverage";
            return res;
        }
    }
}

SparseSolution sparsify_to_basic(const SparseSolution& x, int n) {
    if (n < 1) throw std::invalid_argument("sparsify: need at least one element");
    SparseSolution sol = x;
    sol.tidy();
    while (static_cast<int>(sol.entries.size()) > n) {
        const int k = n + 1;
        Eigen::MatrixXd m(n, k);
        for (int j = 0; j < k; ++j) {
            Vec col = pattern_coverage(sol.entries[static_cast<size_t>(j)].pattern, n);
            for (int i = 0; i < n; ++i) m(i, j) = col[static_cast<size_t>(i)];
        }
        // n+1 columns in n dimensions always carry a null direction; move
        // along it, cost non-increasing, until the first weight hits zero.
        Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
        Eigen::MatrixXd ker = lu.kernel();
        if (ker.cols() < 1 || ker.col(0).cwiseAbs().maxCoeff() < kDegenerateTol) {
            sol.sparsify_warning = true;
            return sol;
        }
        Eigen::VectorXd dir = ker.col(0) / ker.col(0).cwiseAbs().maxCoeff();
        double cost_dir = 0.0;
        for (int j = 0; j < k; ++j) cost_dir += dir(j) * sol.entries[static_cast<size_t>(j)].pattern.cost;
        if (cost_dir > 0.0) dir = -dir;
        int hit = -1;
        double t = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            if (dir(j) >= -kDegenerateTol) continue;
            const double step = sol.entries[static_cast<size_t>(j)].weight / -dir(j);
            if (step < t) {
                t = step;
                hit = j;
            }
        }
        if (hit < 0) {  // numerically sign-free direction, nothing to pivot on
            sol.sparsify_warning = true;
            return sol;
        }
        for (int j = 0; j < k; ++j) {
            double& w = sol.entries[static_cast<size_t>(j)].weight;
            w = j == hit ? 0.0 : std::max(0.0, w + t * dir(j));
        }
        sol.tidy();
    }
    sol.tidy();
    return sol;
}

SparseSolution solve_pattern_lp(const PatternFamily& family, double delta) {
    const int n = family.n;
    if (n < 1) throw std::invalid_argument("pattern lp: need at least one element");
    if (!(delta > 0.0)) throw std::invalid_argument("pattern lp: delta must be positive");
    if (!(family.min_cost > 0.0) || family.min_cost > 1.0)
        throw std::invalid_argument("pattern lp: min_cost must lie in (0, 1]");
    if (!family.oracle) throw std::invalid_argument("pattern lp: family has no oracle");

    const double eps = delta / (4.0 * n);
    const double step = delta / 2.0;
    PatternPool pool;

    for (double r = step;; r += step) {
        bool last = false;
        if (r >= n - 1e-12) {
            r = static_cast<double>(n);  // n singletons always fit this budget
            last = true;
        }
        CoverProblem prob;
        prob.n = n;
        prob.r = r;
        prob.epsilon = eps;
        prob.rho = std::max(1.0, r / family.min_cost);
        MwResult res = mw_cover(prob, family, &pool);

        SparseSolution sol;
        bool usable = false;
        if (res.status == MwStatus::Solved) {
            sol = std::move(res.solution);
            usable = true;
        } else if (res.status == MwStatus::IterationLimit && !res.solution.entries.empty()) {
            // Salvage the attached iterate when it already covers far enough.
            if (min_entry(res.solution.coverage(n)) >= 1.0 - eps) {
                sol = std::move(res.solution);
                usable = true;
            }
        }

        if (usable) {
            for (auto& e : sol.entries) e.weight = std::min(e.weight / (1.0 - eps), 1.0);
            sol.tidy();
            sol = sparsify_to_basic(sol, n);
            for (auto& e : sol.entries) e.weight = std::min(e.weight, 1.0);
            sol.tidy();
            Vec cov = sol.coverage(n);
            for (int i = 0; i < n; ++i)
                if (cov[static_cast<size_t>(i)] < 1.0 - 1e-9)
                    throw std::runtime_error("pattern lp: cover lost in post-processing");
            return sol;
        }
        if (last)
            throw std::runtime_error("pattern lp: no budget up to n was feasible; "
                                     "the oracle and the family disagree");
        // Certified lower bounds let the scan skip budgets that are
        // infeasible for the same reason; the first feasible r is unchanged.
        if (res.lower_bound > r + step) {
            const double j = std::ceil((res.lower_bound - 1e-9) / step);
            r = std::max(r, (j - 1.0) * step);
        }
    }
}

}  // namespace entroround
