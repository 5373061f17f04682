// Small dense matrix and coloring value types shared across modules.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace entroround {

using Vec = std::vector<double>;

// Row-major dense matrix. Rows are constraints, columns are the objects being
// colored (items, patterns, ...). Kept deliberately plain; algorithms that
// need factorizations map the storage into Eigen.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("matrix dimensions must be nonnegative");
    }

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows_init) {
        DenseMatrix m;
        m.rows = static_cast<int>(rows_init.size());
        m.cols = m.rows ? static_cast<int>(rows_init.begin()->size()) : 0;
        m.a.reserve(static_cast<size_t>(m.rows) * m.cols);
        for (const auto& r : rows_init) {
            if (static_cast<int>(r.size()) != m.cols)
                throw std::invalid_argument("ragged row in matrix literal");
            m.a.insert(m.a.end(), r.begin(), r.end());
        }
        return m;
    }

    double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    const double* row_ptr(int i) const { return a.data() + static_cast<size_t>(i) * cols; }

    double row_dot(int i, const Vec& x) const {
        if (static_cast<int>(x.size()) != cols)
            throw std::invalid_argument("vector length does not match column count");
        const double* r = row_ptr(i);
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += r[j] * x[j];
        return s;
    }

    double row_norm2(int i) const {
        const double* r = row_ptr(i);
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += r[j] * r[j];
        return std::sqrt(s);
    }

    double row_norm1(int i) const {
        const double* r = row_ptr(i);
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += std::abs(r[j]);
        return s;
    }

    void check_finite(const std::string& what) const {
        for (double v : a)
            if (!std::isfinite(v)) throw std::invalid_argument(what + ": non-finite entry");
    }
};

// Partial coloring chi in {-1,0,+1}^m. A full coloring has no zeros.
struct PartialColoring {
    std::vector<std::int8_t> v;

    PartialColoring() = default;
    explicit PartialColoring(int m) : v(static_cast<size_t>(m), 0) {}

    int size() const { return static_cast<int>(v.size()); }

    int support() const {
        int s = 0;
        for (auto x : v) s += (x != 0);
        return s;
    }

    bool full() const {
        for (auto x : v)
            if (x == 0) return false;
        return true;
    }

    void negate() {
        for (auto& x : v) x = static_cast<std::int8_t>(-x);
    }
};

// Joint bucket key of a coloring: one rounded ratio per matrix row.
using SignatureVector = std::vector<std::int64_t>;

inline double dot_coloring(const DenseMatrix& m, int row, const PartialColoring& chi) {
    const double* r = m.row_ptr(row);
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += r[j] * chi.v[j];
    return s;
}

}  // namespace entroround
