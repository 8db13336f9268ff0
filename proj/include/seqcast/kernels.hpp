#pragma once

#include <cstddef>

#ifdef SEQCAST_HAVE_OPENMP
#include <omp.h>
#endif

/// Dense numeric kernels used by the tensor engine and the attribution
/// samplers. Every kernel exists twice: a plain serial reference in
/// kernels::serial and an OpenMP version that splits work across threads.
/// The parallel loops only ever divide *output* elements between threads and
/// keep the per-element arithmetic order identical to the serial code, so the
/// two backends produce byte-identical results for any thread count. The
/// serial bodies stay around as the ground truth the tests (and the
/// bench_kernels tool) compare against.
namespace seqcast::kernels {

/// Process-wide backend toggle. Defaults to parallel when compiled with
/// OpenMP; set_parallel(false) forces the serial reference everywhere.
bool parallel_enabled();
void set_parallel(bool on);

/// Problem sizes below these thresholds always run serially: the fork/join
/// overhead dwarfs the work.
inline constexpr std::size_t kMatmulGrain = 16 * 1024;   // m*n*k
inline constexpr std::size_t kElemwiseGrain = 32 * 1024; // element count

namespace serial {
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
// c[m,n] = a[m,k] * b[n,k]^T
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
// c[k,n] = a[m,k]^T * b[m,n]
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void add(const double* a, const double* b, double* c, std::size_t n);
void sub(const double* a, const double* b, double* c, std::size_t n);
void mul(const double* a, const double* b, double* c, std::size_t n);
void scale(const double* a, double s, double* c, std::size_t n);
void axpy(double s, const double* x, double* y, std::size_t n);
}  // namespace serial

#ifdef SEQCAST_HAVE_OPENMP
namespace omp {
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void add(const double* a, const double* b, double* c, std::size_t n);
void sub(const double* a, const double* b, double* c, std::size_t n);
void mul(const double* a, const double* b, double* c, std::size_t n);
void scale(const double* a, double s, double* c, std::size_t n);
void axpy(double s, const double* x, double* y, std::size_t n);
}  // namespace omp
#endif

// Dispatch layer: picks the OpenMP backend when it is compiled in, enabled,
// and the problem is big enough to be worth forking for.
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t m, std::size_t k, std::size_t n);
void add(const double* a, const double* b, double* c, std::size_t n);
void sub(const double* a, const double* b, double* c, std::size_t n);
void mul(const double* a, const double* b, double* c, std::size_t n);
void scale(const double* a, double s, double* c, std::size_t n);
void axpy(double s, const double* x, double* y, std::size_t n);

/// Runs fn(i) for i in [0, n). When the parallel backend is active, iterations
/// are distributed across threads; fn must only write to state owned by
/// iteration i (e.g. slot i of a result vector) so the schedule cannot change
/// the outcome.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#ifdef SEQCAST_HAVE_OPENMP
    if (parallel_enabled() && n > 1) {
        #pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace seqcast::kernels
