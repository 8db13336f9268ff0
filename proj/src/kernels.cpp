#include "seqcast/kernels.hpp"

#include <atomic>

namespace seqcast::kernels {

namespace {
std::atomic<bool> g_parallel{
#ifdef SEQCAST_HAVE_OPENMP
    true
#else
    false
#endif
};
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void set_parallel(bool on) {
#ifndef SEQCAST_HAVE_OPENMP
    on = false;  // nothing to enable without the OpenMP backend
#endif
    g_parallel.store(on, std::memory_order_relaxed);
}

// The row body is shared verbatim between the serial and OpenMP variants so
// the per-element arithmetic (and therefore the rounding) cannot diverge.
namespace detail {

inline void matmul_row(const double* a, const double* b, double* c,
                       std::size_t i, std::size_t k, std::size_t n) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        const double av = arow[p];
        if (av == 0.0) continue;
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

inline void matmul_nt_row(const double* a, const double* b, double* c,
                          std::size_t i, std::size_t k, std::size_t n) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
        const double* brow = b + j * k;
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] = acc;
    }
}

inline void matmul_tn_row(const double* a, const double* b, double* c,
                          std::size_t r, std::size_t m, std::size_t k, std::size_t n) {
    // row r of the k x n output: sum over the m rows of a and b
    double* crow = c + r * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double av = a[i * k + r];
        if (av == 0.0) continue;
        const double* brow = b + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

}  // namespace detail

namespace serial {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) detail::matmul_row(a, b, c, i, k, n);
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) detail::matmul_nt_row(a, b, c, i, k, n);
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t r = 0; r < k; ++r) detail::matmul_tn_row(a, b, c, r, m, k, n);
}

void add(const double* a, const double* b, double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) c[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) c[i] = a[i] * s;
}

void axpy(double s, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

}  // namespace serial

#ifdef SEQCAST_HAVE_OPENMP
namespace omp {

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(m); ++i) {
        detail::matmul_row(a, b, c, static_cast<std::size_t>(i), k, n);
    }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(m); ++i) {
        detail::matmul_nt_row(a, b, c, static_cast<std::size_t>(i), k, n);
    }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long r = 0; r < static_cast<long long>(k); ++r) {
        detail::matmul_tn_row(a, b, c, static_cast<std::size_t>(r), m, k, n);
    }
}

void add(const double* a, const double* b, double* c, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) c[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* c, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) c[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* c, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) c[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* c, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) c[i] = a[i] * s;
}

void axpy(double s, const double* x, double* y, std::size_t n) {
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += s * x[i];
}

}  // namespace omp
#endif

namespace {
inline bool go_parallel(std::size_t work, std::size_t grain) {
#ifdef SEQCAST_HAVE_OPENMP
    return parallel_enabled() && work >= grain;
#else
    (void)work;
    (void)grain;
    return false;
#endif
}
}  // namespace

#ifdef SEQCAST_HAVE_OPENMP
#define SEQCAST_DISPATCH(cond, call) \
    do {                             \
        if (cond) {                  \
            omp::call;               \
        } else {                     \
            serial::call;            \
        }                            \
    } while (0)
#else
#define SEQCAST_DISPATCH(cond, call) \
    do {                             \
        serial::call;                \
    } while (0)
#endif

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(m * k * n, kMatmulGrain), matmul(a, b, c, m, k, n));
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(m * k * n, kMatmulGrain), matmul_nt(a, b, c, m, k, n));
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(m * k * n, kMatmulGrain), matmul_tn(a, b, c, m, k, n));
}

void add(const double* a, const double* b, double* c, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(n, kElemwiseGrain), add(a, b, c, n));
}

void sub(const double* a, const double* b, double* c, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(n, kElemwiseGrain), sub(a, b, c, n));
}

void mul(const double* a, const double* b, double* c, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(n, kElemwiseGrain), mul(a, b, c, n));
}

void scale(const double* a, double s, double* c, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(n, kElemwiseGrain), scale(a, s, c, n));
}

void axpy(double s, const double* x, double* y, std::size_t n) {
    SEQCAST_DISPATCH(go_parallel(n, kElemwiseGrain), axpy(s, x, y, n));
}

#undef SEQCAST_DISPATCH

}  // namespace seqcast::kernels
