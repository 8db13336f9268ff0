#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace seqcast::core {

/// Solves the square system A x = b in place with partially pivoted Gaussian
/// elimination. `a` is row-major n*n and is destroyed; `b` becomes the
/// solution. Returns false when a pivot falls below `tol`, i.e. the matrix is
/// numerically singular.
inline bool solve_linear(std::vector<double>& a, std::vector<double>& b,
                         std::size_t n, double tol = 1e-12) {
    for (std::size_t col = 0; col < n; ++col) {
        // pick the row with the largest magnitude in this column
        std::size_t pivot = col;
        double best = std::fabs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double mag = std::fabs(a[r * n + col]);
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (!(best > tol)) return false;
        if (pivot != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double factor = a[r * n + col] * inv;
            if (factor == 0.0) continue;
            a[r * n + col] = 0.0;
            for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    // back substitution
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i * n + c] * b[c];
        b[i] = acc / a[i * n + i];
    }
    return true;
}

/// Numerical rank of a row-major n_rows x n_cols matrix by Gaussian
/// elimination with partial pivoting (copy taken by value).
inline std::size_t matrix_rank(std::vector<double> a, std::size_t n_rows, std::size_t n_cols,
                               double tol = 1e-9) {
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n_cols && rank < n_rows; ++col) {
        std::size_t pivot = rank;
        double best = std::fabs(a[rank * n_cols + col]);
        for (std::size_t r = rank + 1; r < n_rows; ++r) {
            const double mag = std::fabs(a[r * n_cols + col]);
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (!(best > tol)) continue;
        if (pivot != rank) {
            for (std::size_t c = 0; c < n_cols; ++c) std::swap(a[pivot * n_cols + c], a[rank * n_cols + c]);
        }
        const double inv = 1.0 / a[rank * n_cols + col];
        for (std::size_t r = rank + 1; r < n_rows; ++r) {
            const double factor = a[r * n_cols + col] * inv;
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n_cols; ++c) a[r * n_cols + c] -= factor * a[rank * n_cols + c];
        }
        ++rank;
    }
    return rank;
}

/// Weighted least squares via the normal equations: minimizes
/// sum_i w_i (x_i . beta - y_i)^2 + ridge * |beta'|^2 where beta' optionally
/// excludes the last coefficient (intercept) from the penalty.
/// `x` is row-major n_rows * n_cols. Returns false on a singular system.
inline bool weighted_least_squares(const std::vector<double>& x,
                                   const std::vector<double>& y,
                                   const std::vector<double>& w,
                                   std::size_t n_rows, std::size_t n_cols,
                                   std::vector<double>& beta,
                                   double ridge = 0.0,
                                   bool penalize_last = true) {
    std::vector<double> ata(n_cols * n_cols, 0.0);
    std::vector<double> atb(n_cols, 0.0);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const double* row = &x[i * n_cols];
        const double wi = w[i];
        for (std::size_t p = 0; p < n_cols; ++p) {
            const double wp = wi * row[p];
            atb[p] += wp * y[i];
            for (std::size_t q = p; q < n_cols; ++q) ata[p * n_cols + q] += wp * row[q];
        }
    }
    // mirror the upper triangle and add the ridge penalty on the diagonal
    for (std::size_t p = 0; p < n_cols; ++p) {
        for (std::size_t q = p + 1; q < n_cols; ++q) ata[q * n_cols + p] = ata[p * n_cols + q];
        bool penalized = penalize_last || p + 1 < n_cols;
        if (penalized) ata[p * n_cols + p] += ridge;
    }
    beta = atb;
    return solve_linear(ata, beta, n_cols);
}

}  // namespace seqcast::core
