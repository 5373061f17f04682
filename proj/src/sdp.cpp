#include "entroround/sdp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "entroround/gfunc.hpp"

namespace entroround {

SdpSpec build_coloring_sdp(const DenseMatrix& a, const Vec& delta, const DenseMatrix& b,
                           const Vec& mu, const std::vector<int>& active) {
    if (active.empty()) throw std::invalid_argument("build_coloring_sdp: empty active set");
    if (static_cast<int>(delta.size()) != a.rows)
        throw std::invalid_argument("build_coloring_sdp: delta length != tracked row count");
    if (static_cast<int>(mu.size()) != b.rows)
        throw std::invalid_argument("build_coloring_sdp: mu length != soft row count");
    if (a.rows > 0 && b.rows > 0 && a.cols != b.cols)
        throw std::invalid_argument("build_coloring_sdp: column count mismatch");

    const int dim = static_cast<int>(active.size());
    SdpSpec spec;
    spec.dim = dim;
    spec.mass_floor = static_cast<double>(dim) / 2.0;
    spec.rows.reserve(static_cast<size_t>(a.rows + b.rows));

    for (int i = 0; i < a.rows; ++i) {
        if (!(delta[i] > 0.0))
            throw std::invalid_argument("build_coloring_sdp: delta must be positive");
        SdpRowConstraint row;
        row.coeffs.resize(static_cast<size_t>(dim));
        for (int j = 0; j < dim; ++j) row.coeffs[j] = a.at(i, active[j]);
        row.cap = delta[i];
        spec.rows.push_back(std::move(row));
    }
    const double sqrt_j = std::sqrt(static_cast<double>(dim));
    for (int i = 0; i < b.rows; ++i) {
        if (!(mu[i] > 0.0))
            throw std::invalid_argument("build_coloring_sdp: mu must be positive");
        SdpRowConstraint row;
        row.coeffs.resize(static_cast<size_t>(dim));
        for (int j = 0; j < dim; ++j) row.coeffs[j] = b.at(i, active[j]);
        row.cap = g_inverse(mu[i] * dim / 10.0) * sqrt_j;
        spec.rows.push_back(std::move(row));
    }
    return spec;
}

namespace {

struct GramResiduals {
    double worst_row = 0.0;
    double mass = 0.0;
    double unit = 0.0;
    double total() const { return std::max(worst_row, std::max(mass, unit)); }
};

// Residuals in vector space (||u|| - cap, not squared), so the stopping rule
// agrees with the independent checker even for caps near zero.
GramResiduals residuals_of(const SdpSpec& spec, const Eigen::MatrixXd& y) {
    GramResiduals r;
    for (const auto& row : spec.rows) {
        Eigen::Map<const Eigen::VectorXd> c(row.coeffs.data(), spec.dim);
        const double q = std::max(0.0, c.dot(y * c));
        const double excess = std::sqrt(q) - row.cap;
        if (excess > r.worst_row) r.worst_row = excess;
    }
    const double tr = y.trace();
    if (spec.mass_floor - tr > r.mass) r.mass = spec.mass_floor - tr;
    for (int j = 0; j < spec.dim; ++j) {
        const double excess = std::sqrt(std::max(0.0, y(j, j))) - 1.0;
        if (excess > r.unit) r.unit = excess;
    }
    return r;
}

}  // namespace

SdpResult solve_sdp_feasibility(const SdpSpec& spec, const Config& cfg) {
    const int d = spec.dim;
    if (d <= 0) throw std::invalid_argument("solve_sdp_feasibility: empty spec");

    Eigen::MatrixXd y = Eigen::MatrixXd::Identity(d, d);
    const double tol = cfg.sdp_tol;

    SdpResult out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;

    int sweep = 0;
    GramResiduals res = residuals_of(spec, y);
    while (res.total() > tol && sweep < cfg.sdp_max_sweeps) {
        ++sweep;
        // Halfspace corrections. Each constraint is linear in the Gram matrix:
        // <a a^T, Y> <= cap^2, <e_j e_j^T, Y> <= 1, <I, Y> >= mass_floor.
        for (const auto& row : spec.rows) {
            Eigen::Map<const Eigen::VectorXd> c(row.coeffs.data(), d);
            const double nrm2 = c.squaredNorm();
            if (nrm2 < 1e-300) continue;  // all-zero row on this plane: vacuous
            const double q = c.dot(y * c);
            const double excess = q - row.cap * row.cap;
            if (excess > 0.0) y.noalias() -= (excess / (nrm2 * nrm2)) * (c * c.transpose());
        }
        for (int j = 0; j < d; ++j)
            if (y(j, j) > 1.0) y(j, j) = 1.0;
        const double tr = y.trace();
        if (tr < spec.mass_floor)
            y.diagonal().array() += (spec.mass_floor - tr) / static_cast<double>(d);

        // PSD projection: clip negative eigenvalues.
        eig.compute(y);
        Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
        y = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
        y = 0.5 * (y + y.transpose());  // keep exactly symmetric

        res = residuals_of(spec, y);
    }

    out.sweeps = sweep;
    out.residual = res.total();
    out.converged = res.total() <= tol;

    // Factor Y = V^T V; column j of V is vector v_j.
    eig.compute(y);
    Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd v = ev.asDiagonal() * eig.eigenvectors().transpose();
    out.vectors.dim = d;
    out.vectors.v.assign(static_cast<size_t>(d) * d, 0.0);
    for (int j = 0; j < d; ++j)
        for (int r = 0; r < d; ++r) out.vectors.v[static_cast<size_t>(j) * d + r] = v(r, j);
    return out;
}

SdpResiduals check_sdp_residuals(const SdpSpec& spec, const VectorAssignment& va) {
    if (va.dim != spec.dim) throw std::invalid_argument("check_sdp_residuals: dimension mismatch");
    const int d = spec.dim;
    SdpResiduals out;

    std::vector<double> u(static_cast<size_t>(d));
    for (const auto& row : spec.rows) {
        for (int r = 0; r < d; ++r) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += row.coeffs[j] * va.v[static_cast<size_t>(j) * d + r];
            u[static_cast<size_t>(r)] = s;
        }
        double nrm = 0.0;
        for (int r = 0; r < d; ++r) nrm += u[static_cast<size_t>(r)] * u[static_cast<size_t>(r)];
        nrm = std::sqrt(nrm);
        if (nrm - row.cap > out.worst_row_excess) out.worst_row_excess = nrm - row.cap;
    }

    double mass = 0.0;
    for (int j = 0; j < d; ++j) {
        const double nj = va.dot_columns(j, j);
        mass += nj;
        const double excess = std::sqrt(nj) - 1.0;
        if (excess > out.worst_unit_excess) out.worst_unit_excess = excess;
    }
    if (spec.mass_floor - mass > out.mass_deficit) out.mass_deficit = spec.mass_floor - mass;
    return out;
}

}  // namespace entroround
