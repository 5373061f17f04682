#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "entroround/gfunc.hpp"
#include "entroround/sdp.hpp"

using namespace entroround;

namespace {

Config test_config() {
    Config cfg = default_config();
    return cfg;
}

std::vector<int> all_columns(int m) {
    std::vector<int> idx(static_cast<size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

}  // namespace

TEST_CASE("empty spec keeps the mass floor and unit caps") {
    DenseMatrix a, b;
    SdpSpec spec = build_coloring_sdp(a, {}, b, {}, all_columns(4));
    CHECK(spec.dim == 4);
    CHECK(spec.rows.empty());
    CHECK(spec.mass_floor == doctest::Approx(2.0));
}

TEST_CASE("tracked row keeps its slack as the cap") {
    DenseMatrix a = DenseMatrix::from_rows({{1.0, -2.0, 0.5}});
    DenseMatrix b;
    SdpSpec spec = build_coloring_sdp(a, {3.0}, b, {}, all_columns(3));
    REQUIRE(spec.rows.size() == 1);
    CHECK(spec.rows[0].cap == doctest::Approx(3.0));
    CHECK(spec.rows[0].coeffs.size() == 3);
    CHECK(spec.rows[0].coeffs[1] == doctest::Approx(-2.0));
}

TEST_CASE("soft row cap follows the entropy budget at the active width") {
    DenseMatrix a;
    DenseMatrix b;
    b.rows = 1;
    b.cols = 40;
    b.a.assign(40, 1.0);
    SdpSpec spec = build_coloring_sdp(a, {}, b, {1.0}, all_columns(40));
    REQUIRE(spec.rows.size() == 1);
    // weight 1, width 40: budget argument 4, cap g_inverse(4) * sqrt(40)
    CHECK(spec.rows[0].cap == doctest::Approx(g_inverse(4.0) * std::sqrt(40.0)));
    CHECK(spec.mass_floor == doctest::Approx(20.0));
}

TEST_CASE("empty active set is rejected") {
    DenseMatrix a, b;
    CHECK_THROWS_AS(build_coloring_sdp(a, {}, b, {}, {}), std::invalid_argument);
}

TEST_CASE("restriction picks out the active columns") {
    DenseMatrix a = DenseMatrix::from_rows({{1.0, 2.0, 3.0, 4.0}});
    DenseMatrix b;
    SdpSpec spec = build_coloring_sdp(a, {1.0}, b, {}, {1, 3});
    REQUIRE(spec.rows.size() == 1);
    CHECK(spec.dim == 2);
    CHECK(spec.rows[0].coeffs[0] == doctest::Approx(2.0));
    CHECK(spec.rows[0].coeffs[1] == doctest::Approx(4.0));
}

TEST_CASE("unconstrained solve meets the mass floor with unit vectors") {
    DenseMatrix a, b;
    SdpSpec spec = build_coloring_sdp(a, {}, b, {}, all_columns(4));
    Config cfg = test_config();
    SdpResult res = solve_sdp_feasibility(spec, cfg);
    REQUIRE(res.converged);
    SdpResiduals r = check_sdp_residuals(spec, res.vectors);
    CHECK(r.ok(cfg.sdp_tol * 8.0));
    double mass = 0.0;
    for (int j = 0; j < 4; ++j) mass += res.vectors.dot_columns(j, j);
    CHECK(mass >= 2.0 - 1e-4);
}

TEST_CASE("a zero-cap sum row forces antipodal unit vectors") {
    DenseMatrix a = DenseMatrix::from_rows({{1.0, 1.0}});
    DenseMatrix b;
    SdpSpec spec = build_coloring_sdp(a, {1e-9}, b, {}, all_columns(2));
    Config cfg = test_config();
    SdpResult res = solve_sdp_feasibility(spec, cfg);
    REQUIRE(res.converged);
    SdpResiduals r = check_sdp_residuals(spec, res.vectors);
    CHECK(r.ok(cfg.sdp_tol * 8.0));
    // mass floor 1 with |v1 + v2| ~ 0 and unit caps: v1 and v2 nearly opposite
    double cross = res.vectors.dot_columns(0, 1);
    double m0 = res.vectors.dot_columns(0, 0);
    double m1 = res.vectors.dot_columns(1, 1);
    CHECK(m0 + m1 + 2.0 * cross <= 1e-3);  // |v1 + v2|^2
    CHECK(m0 + m1 >= 1.0 - 1e-4);
}

TEST_CASE("residual checker flags violations") {
    DenseMatrix a = DenseMatrix::from_rows({{1.0, 1.0}});
    DenseMatrix b;
    SdpSpec spec = build_coloring_sdp(a, {0.5}, b, {}, all_columns(2));
    // hand-made assignment violating the row cap: both vectors equal e1
    VectorAssignment va;
    va.dim = 2;
    va.v.assign(4, 0.0);
    va.v[0] = 1.0;  // column 0 = e1
    va.v[2] = 1.0;  // column 1 = e1
    SdpResiduals r = check_sdp_residuals(spec, va);
    CHECK(r.worst_row_excess > 1.0);
    CHECK_FALSE(r.ok(1e-6));
}

TEST_CASE("tight but satisfiable mixed spec converges") {
    DenseMatrix a = DenseMatrix::from_rows({{1.0, -1.0, 0.0, 0.0},
                                            {0.0, 0.0, 1.0, -1.0}});
    DenseMatrix b;
    b.rows = 1;
    b.cols = 4;
    b.a = {0.5, 0.5, 0.5, 0.5};
    SdpSpec spec = build_coloring_sdp(a, {1.0, 1.0}, b, {0.5}, all_columns(4));
    Config cfg = test_config();
    SdpResult res = solve_sdp_feasibility(spec, cfg);
    REQUIRE(res.converged);
    CHECK(check_sdp_residuals(spec, res.vectors).ok(cfg.sdp_tol * 8.0));
}
