#include "entroround/rounding.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "entroround/coloring.hpp"
#include "entroround/gfunc.hpp"
#include "entroround/walk.hpp"

namespace entroround {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kPreserveTol = 1e-9;
constexpr double kRowTol = 1e-9;

}  // namespace

int RoundingInstance::cols() const {
    if (a.rows > 0) return a.cols;
    if (b.rows > 0) return b.cols;
    return static_cast<int>(x.size());
}

void RoundingInstance::validate() const {
    const int m = cols();
    if (static_cast<int>(x.size()) != m)
        throw std::invalid_argument("rounding: x length does not match columns");
    if (a.rows > 0 && a.cols != m)
        throw std::invalid_argument("rounding: tracked block has wrong width");
    if (b.rows > 0 && b.cols != m)
        throw std::invalid_argument("rounding: soft block has wrong width");
    if (static_cast<int>(delta.size()) != a.rows)
        throw std::invalid_argument("rounding: delta length does not match tracked rows");
    if (static_cast<int>(mu.size()) != b.rows)
        throw std::invalid_argument("rounding: mu length does not match soft rows");
    if (!c.empty() && static_cast<int>(c.size()) != m)
        throw std::invalid_argument("rounding: objective length does not match columns");
    for (double d : delta)
        if (!(d > 0.0)) throw std::invalid_argument("rounding: slacks must be positive");
    double mu_sum = 0.0;
    for (double w : mu) {
        if (!(w > 0.0) || w > 1.0)
            throw std::invalid_argument("rounding: soft weights must lie in (0,1]");
        mu_sum += w;
    }
    if (mu_sum > 1.0 + 1e-9)
        throw std::invalid_argument("rounding: soft weights must sum to at most 1");
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j)
            if (std::abs(b.at(i, j)) > 1.0 + 1e-12)
                throw std::invalid_argument("rounding: soft entries must lie in [-1,1]");
    for (double e : c)
        if (std::abs(e) > 1.0 + 1e-12)
            throw std::invalid_argument("rounding: objective entries must lie in [-1,1]");
    for (double v : x)
        if (!(v >= -1e-12) || !(v <= 1.0 + 1e-12))
            throw std::invalid_argument("rounding: x must lie in [0,1]");
    a.check_finite("rounding tracked block");
    b.check_finite("rounding soft block");
}

RoundingInstance append_objective_row(const RoundingInstance& inst) {
    if (inst.c.empty())
        throw std::invalid_argument("append_objective_row: no objective present");
    if (inst.objective_appended)
        throw std::invalid_argument("append_objective_row: already appended");
    inst.validate();
    RoundingInstance out = inst;
    const int m = inst.cols();
    if (out.b.rows == 0) {
        out.b.cols = m;
        out.b.a.clear();
    }
    out.b.a.insert(out.b.a.end(), inst.c.begin(), inst.c.end());
    out.b.rows += 1;
    for (double& w : out.mu) w *= 0.5;
    out.mu.push_back(0.5);
    out.c.clear();
    out.objective_appended = true;
    return out;
}

ReduceOutcome reduce_to_basic(const RoundingInstance& inst) {
    inst.validate();
    ReduceOutcome out;
    out.inst = inst;
    out.reduced = true;

    const int m = inst.cols();
    const int n_rows = inst.total_rows();
    Vec& x = out.inst.x;

    // Row images of the starting point, used to confirm preservation.
    Vec base_image(static_cast<size_t>(n_rows), 0.0);
    auto stacked_dot = [&](const Vec& v, int i) {
        if (i < inst.a.rows) {
            double s = 0.0;
            const double* r = inst.a.row_ptr(i);
            for (int j = 0; j < m; ++j) s += r[j] * v[static_cast<size_t>(j)];
            return s;
        }
        double s = 0.0;
        const double* r = inst.b.row_ptr(i - inst.a.rows);
        for (int j = 0; j < m; ++j) s += r[j] * v[static_cast<size_t>(j)];
        return s;
    };
    for (int i = 0; i < n_rows; ++i) base_image[static_cast<size_t>(i)] = stacked_dot(x, i);

    auto fractional = [&]() {
        std::vector<int> f;
        for (int j = 0; j < m; ++j) {
            double v = x[static_cast<size_t>(j)];
            if (v > kBoundaryTol && v < 1.0 - kBoundaryTol) f.push_back(j);
        }
        return f;
    };

    int guard = m + 5;
    while (guard-- > 0) {
        std::vector<int> f = fractional();
        if (static_cast<int>(f.size()) <= n_rows) break;
        const int fs = static_cast<int>(f.size());

        Eigen::VectorXd w(fs);
        if (n_rows == 0) {
            w.setZero();
            w(0) = 1.0;
        } else {
            Eigen::MatrixXd mat(n_rows, fs);
            for (int i = 0; i < n_rows; ++i)
                for (int jj = 0; jj < fs; ++jj) {
                    int j = f[static_cast<size_t>(jj)];
                    mat(i, jj) = (i < inst.a.rows) ? inst.a.at(i, j)
                                                   : inst.b.at(i - inst.a.rows, j);
                }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
            lu.setThreshold(1e-10);
            Eigen::MatrixXd kernel = lu.kernel();
            if (kernel.cols() == 0) {
                out.reduced = false;
                out.note = "no null direction despite excess fractional support";
                out.inst = inst;
                return out;
            }
            w = kernel.col(0);
        }
        double winf = w.cwiseAbs().maxCoeff();
        if (!(winf > 1e-12)) {
            out.reduced = false;
            out.note = "degenerate null direction";
            out.inst = inst;
            return out;
        }
        w /= winf;

        // Walk along +w until the first coordinate hits a bound.
        double t = std::numeric_limits<double>::infinity();
        for (int jj = 0; jj < fs; ++jj) {
            double wj = w(jj);
            double xj = x[static_cast<size_t>(f[static_cast<size_t>(jj)])];
            if (wj > 1e-12) t = std::min(t, (1.0 - xj) / wj);
            else if (wj < -1e-12) t = std::min(t, -xj / wj);
        }
        if (!std::isfinite(t)) {
            out.reduced = false;
            out.note = "null direction gave no finite step";
            out.inst = inst;
            return out;
        }
        for (int jj = 0; jj < fs; ++jj) {
            size_t j = static_cast<size_t>(f[static_cast<size_t>(jj)]);
            x[j] = std::clamp(x[j] + t * w(jj), 0.0, 1.0);
            if (x[j] <= kBoundaryTol) x[j] = 0.0;
            if (x[j] >= 1.0 - kBoundaryTol) x[j] = 1.0;
        }
    }

    for (int i = 0; i < n_rows; ++i) {
        if (std::abs(stacked_dot(x, i) - base_image[static_cast<size_t>(i)]) > kPreserveTol) {
            out.reduced = false;
            out.note = "row image drifted during reduction";
            out.inst = inst;
            return out;
        }
    }
    return out;
}

Vec DyadicVector::reconstruct() const {
    Vec v(grid.size());
    for (size_t j = 0; j < grid.size(); ++j)
        v[j] = static_cast<double>(grid[j]) / static_cast<double>(1u << bits);
    return v;
}

std::vector<int> DyadicVector::plane(int k) const {
    if (k < 1 || k > bits) throw std::invalid_argument("dyadic plane index out of range");
    std::vector<int> idx;
    for (size_t j = 0; j < grid.size(); ++j)
        if ((grid[j] >> (bits - k)) & 1u) idx.push_back(static_cast<int>(j));
    return idx;
}

DyadicVector dyadic_snap(const Vec& x, int bits, Xoshiro256& rng) {
    if (bits < 1 || bits > 30) throw std::invalid_argument("dyadic_snap: bits out of range");
    DyadicVector out;
    out.bits = bits;
    out.grid.resize(x.size());
    const double unit = static_cast<double>(1u << bits);
    for (size_t j = 0; j < x.size(); ++j) {
        double v = std::clamp(x[j], 0.0, 1.0);
        double scaled = v * unit;
        double base = std::floor(scaled);
        double frac = scaled - base;
        std::uint32_t g = static_cast<std::uint32_t>(base);
        if (frac > 0.0 && rng.uniform01() < frac) g += 1;
        out.grid[j] = std::min(g, 1u << bits);
    }
    return out;
}

DyadicVector dyadic_snap(const Vec& x, int bits, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    return dyadic_snap(x, bits, rng);
}

bool goodness_check(const PartialColoring& chi, const DenseMatrix& a, const Vec& delta,
                    const DenseMatrix& b, const Vec& mu, double cprime, int n_total,
                    int m_total) {
    const double ln = std::log2(static_cast<double>(std::max(2, n_total)));
    const double lm = std::log2(static_cast<double>(std::max(2, m_total)));
    const double hard_scale = cprime * std::sqrt(ln) * std::sqrt(lm);
    for (int i = 0; i < a.rows; ++i) {
        double v = std::abs(dot_coloring(a, i, chi));
        if (v > hard_scale * delta[static_cast<size_t>(i)] + kRowTol) return false;
    }
    for (int i = 0; i < b.rows; ++i) {
        double w = mu[static_cast<size_t>(i)];
        double cap = cprime * std::log2(2.0 / w) / std::sqrt(w);
        if (std::abs(dot_coloring(b, i, chi)) > cap + kRowTol) return false;
    }
    return true;
}

namespace {

DenseMatrix restrict_columns(const DenseMatrix& m, const std::vector<int>& cols) {
    DenseMatrix out;
    out.rows = m.rows;
    out.cols = static_cast<int>(cols.size());
    out.a.resize(static_cast<size_t>(out.rows) * static_cast<size_t>(out.cols));
    for (int i = 0; i < m.rows; ++i) {
        const double* src = m.row_ptr(i);
        double* dst = out.a.data() + static_cast<size_t>(i) * static_cast<size_t>(out.cols);
        for (int jj = 0; jj < out.cols; ++jj) dst[jj] = src[cols[static_cast<size_t>(jj)]];
    }
    return out;
}

// Stacks tracked rows (slack delta_i) on top of soft rows whose slack is the
// entropy cap g_inverse(mu_i |J| / 10) * sqrt(|J|) at the current plane width.
void build_stacked(const RoundingInstance& inst, const std::vector<int>& plane,
                   DenseMatrix& stacked, Vec& slacks) {
    const int width = static_cast<int>(plane.size());
    DenseMatrix aj = restrict_columns(inst.a, plane);
    DenseMatrix bj = restrict_columns(inst.b, plane);
    stacked.rows = aj.rows + bj.rows;
    stacked.cols = width;
    stacked.a.clear();
    stacked.a.reserve(static_cast<size_t>(stacked.rows) * static_cast<size_t>(width));
    stacked.a.insert(stacked.a.end(), aj.a.begin(), aj.a.end());
    stacked.a.insert(stacked.a.end(), bj.a.begin(), bj.a.end());
    slacks = inst.delta;
    for (int i = 0; i < bj.rows; ++i) {
        double w = inst.mu[static_cast<size_t>(i)];
        slacks.push_back(g_inverse(w * width / 10.0) * std::sqrt(static_cast<double>(width)));
    }
}

struct PlaneColoring {
    PartialColoring chi;  // over the plane's columns
    bool ok = false;
    std::string note;
};

// Walk backend for one plane: repeat until the coloring clears goodness_check
// or the retry budget runs out.
PlaneColoring color_plane_with_walk(const RoundingInstance& inst, const std::vector<int>& plane,
                                    const Config& cfg, std::uint64_t seed_base, int n_total,
                                    int m_total, int* retries) {
    PlaneColoring out;
    DenseMatrix aj = restrict_columns(inst.a, plane);
    DenseMatrix bj = restrict_columns(inst.b, plane);
    const int width = static_cast<int>(plane.size());
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        WalkResult res = run_sdp_walk(aj, inst.delta, bj, inst.mu, cfg,
                                      derive_seed(seed_base, static_cast<std::uint64_t>(attempt)),
                                      width);
        if (!res.success) continue;
        if (!goodness_check(res.chi, aj, inst.delta, bj, inst.mu, cfg.goodness_cprime,
                            n_total, m_total)) {
            if (retries) ++*retries;
            continue;
        }
        out.chi = res.chi;
        out.ok = true;
        return out;
    }
    out.note = "walk retries exhausted without a good coloring";
    return out;
}

}  // namespace

RoundingReport entropy_round(const RoundingInstance& inst, RoundingBackend backend,
                             const Config& cfg, std::uint64_t seed) {
    inst.validate();
    RoundingReport report;
    report.backend = (backend == RoundingBackend::Exhaustive) ? "exhaustive" : "sdp-walk";

    const int m = inst.cols();
    const int k_bits = cfg.dyadic_bits;
    const std::uint32_t unit = 1u << k_bits;

    Xoshiro256 rng(derive_seed(seed, 0));
    const std::uint64_t plane_master = derive_seed(seed, 1);
    std::uint64_t walk_calls = 0;

    DyadicVector dy = dyadic_snap(inst.x, k_bits, rng);
    std::vector<std::uint32_t>& grid = dy.grid;

    report.plane_sizes.assign(static_cast<size_t>(k_bits), {});
    report.retries_per_bit.assign(static_cast<size_t>(k_bits), 0);

    const int n_total = inst.total_rows();

    auto finalize = [&](bool ok, const std::string& note) {
        report.success = ok;
        report.note = note;
        report.y.resize(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j)
            report.y[static_cast<size_t>(j)] =
                static_cast<double>(grid[static_cast<size_t>(j)]) / static_cast<double>(unit);
        report.a_drift.resize(static_cast<size_t>(inst.a.rows));
        for (int i = 0; i < inst.a.rows; ++i)
            report.a_drift[static_cast<size_t>(i)] =
                std::abs(inst.a.row_dot(i, inst.x) - inst.a.row_dot(i, report.y));
        report.b_drift.resize(static_cast<size_t>(inst.b.rows));
        for (int i = 0; i < inst.b.rows; ++i)
            report.b_drift[static_cast<size_t>(i)] =
                std::abs(inst.b.row_dot(i, inst.x) - inst.b.row_dot(i, report.y));
        if (inst.objective_appended && inst.b.rows > 0)
            report.objective_drift = report.b_drift.back();
        else if (!inst.c.empty()) {
            double s = 0.0;
            for (int j = 0; j < m; ++j)
                s += inst.c[static_cast<size_t>(j)] *
                     (inst.x[static_cast<size_t>(j)] - report.y[static_cast<size_t>(j)]);
            report.objective_drift = std::abs(s);
        }
        if (n_total == 0 || m == 0) {
            report.factor_raw = 0.0;
            report.factor_adjusted = 0.0;
        } else {
            report.factor_raw = std::log2(std::max(2.0, static_cast<double>(
                                                            2 * std::min(n_total, m))));
            report.factor_adjusted = std::log2(std::max(2.0, static_cast<double>(
                                                                 4 * std::min(n_total, m))));
        }
        report.within_raw = true;
        report.within_adjusted = true;
        for (int i = 0; i < inst.a.rows; ++i) {
            double d = report.a_drift[static_cast<size_t>(i)];
            double di = inst.delta[static_cast<size_t>(i)];
            if (d > report.factor_raw * di + kRowTol) report.within_raw = false;
            if (d > report.factor_adjusted * di + kRowTol) report.within_adjusted = false;
        }
        return report;
    };

    for (int k = k_bits; k >= 1; --k) {
        const size_t bit_index = static_cast<size_t>(k_bits - k);
        const std::uint32_t mask = 1u << (k_bits - k);
        int inner_guard = 2 * m + 8;
        while (inner_guard-- > 0) {
            std::vector<int> plane;
            for (int j = 0; j < m; ++j)
                if (grid[static_cast<size_t>(j)] & mask) plane.push_back(j);
            if (plane.empty()) break;
            report.plane_sizes[bit_index].push_back(static_cast<int>(plane.size()));

            PartialColoring chi;
            const int width = static_cast<int>(plane.size());
            bool use_walk = (backend == RoundingBackend::SdpWalk) || width > cfg.enum_cap;
            if (!use_walk) {
                DenseMatrix stacked;
                Vec slacks;
                build_stacked(inst, plane, stacked, slacks);
                try {
                    chi = find_half_coloring(stacked, slacks, ColoringMode::Pigeonhole,
                                             cfg.enum_cap, cfg.direct_cap);
                } catch (const NoLargeBucket&) {
                    ++report.retries_per_bit[bit_index];
                    if (width <= cfg.direct_cap) {
                        try {
                            chi = find_half_coloring(stacked, slacks, ColoringMode::Direct,
                                                     cfg.enum_cap, cfg.direct_cap);
                        } catch (const NoValidColoring&) {
                            use_walk = true;
                        }
                    } else {
                        use_walk = true;
                    }
                }
            }
            if (use_walk) {
                PlaneColoring pc = color_plane_with_walk(
                    inst, plane, cfg, derive_seed(plane_master, walk_calls++), n_total, m,
                    &report.retries_per_bit[bit_index]);
                if (!pc.ok) return finalize(false, pc.note);
                chi = pc.chi;
            }

            const int sign = rng.flip() ? 1 : -1;
            const std::uint32_t step = mask;
            for (int jj = 0; jj < width; ++jj) {
                int v = chi.v[static_cast<size_t>(jj)];
                if (v == 0) continue;
                size_t j = static_cast<size_t>(plane[static_cast<size_t>(jj)]);
                if (sign * v > 0) grid[j] += step;
                else grid[j] -= step;
            }
        }
        if (inner_guard < 0)
            return finalize(false, "plane loop failed to empty a bit level");
    }

    for (int j = 0; j < m; ++j) {
        std::uint32_t g = grid[static_cast<size_t>(j)];
        if (g != 0 && g != unit)
            return finalize(false, "output escaped the binary grid");
    }
    return finalize(true, "");
}

std::vector<TailRow> tail_report(const std::vector<RoundingReport>& reports,
                                 const RoundingInstance& inst,
                                 const std::vector<double>& lambda_grid) {
    const int n_total = inst.total_rows();
    const int m = inst.cols();
    double factor = 0.0;
    if (n_total > 0 && m > 0)
        factor = std::log2(std::max(2.0, static_cast<double>(4 * std::min(n_total, m))));
    const double scale = std::sqrt(factor);

    std::vector<TailRow> rows;
    rows.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        TailRow row;
        row.lambda = lambda;
        row.bound = 2.0 * std::exp(-lambda * lambda / 2.0);
        for (const RoundingReport& rep : reports) {
            for (int i = 0; i < inst.a.rows; ++i) {
                ++row.total;
                if (rep.a_drift[static_cast<size_t>(i)] >
                    lambda * scale * inst.delta[static_cast<size_t>(i)])
                    ++row.exceed;
            }
        }
        row.freq = (row.total > 0) ? static_cast<double>(row.exceed) /
                                         static_cast<double>(row.total)
                                   : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace entroround
