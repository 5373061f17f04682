// Vector-program feasibility for coloring steps.
//
// Variables are one vector per active column. Row constraints cap the norm of
// a signed combination of those vectors, every vector obeys a unit cap, and a
// mass floor keeps at least half the active columns moving. Solved on the
// Gram matrix by cyclic projection: eigenvalue clipping onto the PSD cone,
// then per-constraint corrections, until residuals fall under tolerance.
#pragma once

#include <vector>

#include "entroround/config.hpp"
#include "entroround/matrix.hpp"

namespace entroround {

struct SdpRowConstraint {
    Vec coeffs;   // length = dim, over active columns in ascending index order
    double cap;   // ||sum_j coeffs_j v_j||_2 <= cap
};

struct SdpSpec {
    int dim = 0;
    std::vector<SdpRowConstraint> rows;
    double mass_floor = 0.0;  // sum_j ||v_j||^2 >= mass_floor; unit caps implicit
};

// Column j of `v` (column-major dim x dim) is the vector assigned to the j-th
// active column.
struct VectorAssignment {
    int dim = 0;
    std::vector<double> v;

    double dot_columns(int p, int q) const {
        double s = 0.0;
        const double* cp = v.data() + static_cast<size_t>(p) * dim;
        const double* cq = v.data() + static_cast<size_t>(q) * dim;
        for (int d = 0; d < dim; ++d) s += cp[d] * cq[d];
        return s;
    }
};

struct SdpResult {
    VectorAssignment vectors;
    bool converged = false;
    int sweeps = 0;
    double residual = 0.0;
};

struct SdpResiduals {
    double worst_row_excess = 0.0;   // max over rows of ||u_r|| - cap
    double mass_deficit = 0.0;       // max(0, floor - mass)
    double worst_unit_excess = 0.0;  // max over columns of ||v_j|| - 1
    bool ok(double tol) const {
        return worst_row_excess <= tol && mass_deficit <= tol && worst_unit_excess <= tol;
    }
};

// Restriction of the tracked rows (caps delta_i) and soft rows (caps
// g_inverse(mu_i |J| / 10) * sqrt(|J|)) to the active column set J, plus the
// |J|/2 mass floor. Rejects an empty active set.
SdpSpec build_coloring_sdp(const DenseMatrix& a, const Vec& delta, const DenseMatrix& b,
                           const Vec& mu, const std::vector<int>& active);

SdpResult solve_sdp_feasibility(const SdpSpec& spec, const Config& cfg = default_config());

// Independent residual check straight from the vectors.
SdpResiduals check_sdp_residuals(const SdpSpec& spec, const VectorAssignment& va);

}  // namespace entroround
