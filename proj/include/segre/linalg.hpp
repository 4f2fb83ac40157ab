#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <segre/errors.hpp>
#include <segre/gaussian_rational.hpp>
#include <segre/series.hpp>

namespace segre
{

template <class T>
using Matrix = std::vector<std::vector<T>>;

using ExactMatrix = Matrix<GaussianRational>;
using SeriesMatrix = Matrix<TruncatedSeries>;

namespace detail
{

template <class T>
std::size_t require_square(const Matrix<T> &m)
{
    for (const auto &row : m) {
        if (row.size() != m.size()) {
            throw domain_error("determinant of a non-square matrix");
        }
    }
    return m.size();
}

inline bool is_zero_value(const GaussianRational &g) { return g.is_zero(); }
inline bool is_zero_value(const TruncatedSeries &s) { return s.is_zero(); }

// Cofactor expansion along the first row, recursing on column subsets.
template <class T>
T laplace_det(const Matrix<T> &m, std::size_t row, std::vector<std::size_t> &cols, const T &zero)
{
    if (cols.size() == 1) {
        return m[row][cols[0]];
    }
    T acc = zero;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const T &e = m[row][cols[k]];
        if (is_zero_value(e)) {
            continue;
        }
        std::size_t c = cols[k];
        cols.erase(cols.begin() + long(k));
        T minor = laplace_det(m, row + 1, cols, zero);
        cols.insert(cols.begin() + long(k), c);
        if (k % 2 == 0) {
            acc += e * minor;
        } else {
            acc -= e * minor;
        }
    }
    return acc;
}

} // namespace detail

// Division-free determinant (Berkowitz). Works over any commutative ring.
template <class T>
T berkowitz_det(const Matrix<T> &a, const T &zero, const T &one)
{
    const std::size_t n = detail::require_square(a);
    if (n == 0) {
        return one;
    }
    std::vector<T> poly{one, -a[0][0]};
    for (std::size_t r = 1; r < n; ++r) {
        // Toeplitz column: 1, -a_rr, -R S, -R A S, ..., -R A^{r-1} S
        std::vector<T> col{one, -a[r][r]};
        std::vector<T> v(r, zero);
        for (std::size_t i = 0; i < r; ++i) {
            v[i] = a[i][r];
        }
        for (std::size_t p = 0; p < r; ++p) {
            T dot = zero;
            for (std::size_t i = 0; i < r; ++i) {
                if (!detail::is_zero_value(a[r][i]) && !detail::is_zero_value(v[i])) {
                    dot += a[r][i] * v[i];
                }
            }
            col.push_back(-dot);
            if (p + 1 < r) {
                std::vector<T> w(r, zero);
                for (std::size_t i = 0; i < r; ++i) {
                    for (std::size_t j = 0; j < r; ++j) {
                        if (!detail::is_zero_value(a[i][j]) && !detail::is_zero_value(v[j])) {
                            w[i] += a[i][j] * v[j];
                        }
                    }
                }
                v = std::move(w);
            }
        }
        std::vector<T> next(r + 2, zero);
        for (std::size_t i = 0; i < r + 2; ++i) {
            for (std::size_t j = 0; j <= i && j < poly.size(); ++j) {
                if (!detail::is_zero_value(col[i - j]) && !detail::is_zero_value(poly[j])) {
                    next[i] += col[i - j] * poly[j];
                }
            }
        }
        poly = std::move(next);
    }
    return n % 2 == 0 ? poly[n] : -poly[n];
}

// Exact determinant over Q(i) by fraction-free (Bareiss) elimination.
inline GaussianRational det_exact(ExactMatrix m)
{
    const std::size_t n = detail::require_square(m);
    if (n == 0) {
        return 1;
    }
    GaussianRational prev = 1;
    bool negate = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k].is_zero()) {
            std::size_t p = k + 1;
            while (p < n && m[p][k].is_zero()) {
                ++p;
            }
            if (p == n) {
                return 0;
            }
            std::swap(m[k], m[p]);
            negate = !negate;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                GaussianRational v = m[k][k] * m[i][j] - m[i][k] * m[k][j];
                m[i][j] = v / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return negate ? -m[n - 1][n - 1] : m[n - 1][n - 1];
}

// Row-reduce in place; returns the pivot columns.
inline std::vector<std::size_t> row_reduce(ExactMatrix &m)
{
    std::vector<std::size_t> pivots;
    const std::size_t rows = m.size();
    const std::size_t cols = rows == 0 ? 0 : m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && m[p][c].is_zero()) {
            ++p;
        }
        if (p == rows) {
            continue;
        }
        std::swap(m[r], m[p]);
        GaussianRational inv = m[r][c].inverse();
        for (std::size_t j = c; j < cols; ++j) {
            m[r][j] *= inv;
        }
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c].is_zero()) {
                continue;
            }
            GaussianRational f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) {
                m[i][j] -= f * m[r][j];
            }
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::size_t rank_exact(ExactMatrix m) { return row_reduce(m).size(); }

// Basis of the right kernel {x : m x = 0}.
inline std::vector<std::vector<GaussianRational>> kernel_exact(ExactMatrix m, std::size_t cols)
{
    auto pivots = row_reduce(m);
    std::vector<bool> is_pivot(cols, false);
    for (auto p : pivots) {
        is_pivot[p] = true;
    }
    std::vector<std::vector<GaussianRational>> basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) {
            continue;
        }
        std::vector<GaussianRational> x(cols);
        x[f] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            x[pivots[r]] = -m[r][f];
        }
        basis.push_back(std::move(x));
    }
    return basis;
}

// Determinant in the truncated series ring. Cofactor expansion up to size 6;
// above that, elimination with unit pivots (division by a unit is exact in
// the truncated ring) and a division-free fallback on the remaining block
// once no unit pivot is left.
inline TruncatedSeries det_series(const SeriesMatrix &m)
{
    const std::size_t n = detail::require_square(m);
    if (n == 0) {
        throw domain_error("det_series of an empty matrix needs a space");
    }
    const TruncatedSeries &ref = m[0][0];
    for (const auto &row : m) {
        for (const auto &e : row) {
            if (!e.same_space(ref)) {
                throw alignment_error("det_series entries over different spaces");
            }
        }
    }
    const TruncatedSeries zero(ref.vars(), ref.cap());
    const TruncatedSeries one = TruncatedSeries::constant(ref.vars(), ref.cap(), 1);
    for (std::size_t k = 0; k < n; ++k) {
        bool row_zero = true, col_zero = true;
        for (std::size_t j = 0; j < n; ++j) {
            row_zero = row_zero && m[k][j].is_zero();
            col_zero = col_zero && m[j][k].is_zero();
        }
        if (row_zero || col_zero) {
            return zero;
        }
    }
    if (n <= 6) {
        std::vector<std::size_t> cols(n);
        for (std::size_t k = 0; k < n; ++k) {
            cols[k] = k;
        }
        return detail::laplace_det(m, 0, cols, zero);
    }
    SeriesMatrix a = m;
    TruncatedSeries acc = one;
    std::size_t k = 0;
    for (; k < n; ++k) {
        std::size_t p = k;
        while (p < n && a[p][k].constant_term().is_zero()) {
            ++p;
        }
        if (p == n) {
            break;
        }
        if (p != k) {
            std::swap(a[p], a[k]);
            acc = -acc;
        }
        acc = acc * a[k][k];
        TruncatedSeries inv = invert_unit(a[k][k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a[i][k].is_zero()) {
                continue;
            }
            TruncatedSeries f = a[i][k] * inv;
            for (std::size_t j = k + 1; j < n; ++j) {
                if (!a[k][j].is_zero()) {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    if (k == n) {
        return acc;
    }
    SeriesMatrix rest;
    for (std::size_t i = k; i < n; ++i) {
        rest.emplace_back(a[i].begin() + long(k), a[i].end());
    }
    return acc * berkowitz_det(rest, zero, one);
}

// Solve m x = rhs over the series ring; m(0) must be invertible.
inline std::vector<TruncatedSeries> solve_series(SeriesMatrix m, std::vector<TruncatedSeries> rhs)
{
    const std::size_t n = detail::require_square(m);
    if (rhs.size() != n) {
        throw domain_error("right-hand side length mismatch");
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && m[p][k].constant_term().is_zero()) {
            ++p;
        }
        if (p == n) {
            ExactMatrix m0(n, std::vector<GaussianRational>(n));
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    m0[i][j] = m[i][j].constant_term();
                }
            }
            throw nondegeneracy_error("linear system singular at the base point", det_exact(m0).to_string());
        }
        std::swap(m[p], m[k]);
        std::swap(rhs[p], rhs[k]);
        TruncatedSeries inv = invert_unit(m[k][k]);
        for (std::size_t j = k; j < n; ++j) {
            m[k][j] = m[k][j] * inv;
        }
        rhs[k] = rhs[k] * inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k || m[i][k].is_zero()) {
                continue;
            }
            TruncatedSeries f = m[i][k];
            for (std::size_t j = k; j < n; ++j) {
                if (!m[k][j].is_zero()) {
                    m[i][j] -= f * m[k][j];
                }
            }
            rhs[i] -= f * rhs[k];
        }
    }
    return rhs;
}

// Entrywise constant terms.
inline ExactMatrix constant_terms(const SeriesMatrix &m)
{
    ExactMatrix r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (const auto &e : m[i]) {
            r[i].push_back(e.constant_term());
        }
    }
    return r;
}

} // namespace segre
