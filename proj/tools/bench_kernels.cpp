// Times the serial reference kernels against the OpenMP backend and checks
// that both produce byte-identical outputs. Also benchmarks the XAI-style
// batched model evaluation that rides on kernels::parallel_for.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "seqcast/core/rng.hpp"
#include "seqcast/kernels.hpp"
#include "seqcast/models.hpp"

#ifdef SEQCAST_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> random_vector(std::size_t n, seqcast::core::Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = Clock::now();
        fn();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

void bench_matmul(std::size_t n) {
    seqcast::core::Rng rng(7 + n);
    const std::vector<double> a = random_vector(n * n, rng);
    const std::vector<double> b = random_vector(n * n, rng);
    std::vector<double> c_serial(n * n), c_parallel(n * n);

    const double t_serial = time_best_of(3, [&] {
        seqcast::kernels::serial::matmul(a.data(), b.data(), c_serial.data(), n, n, n);
    });

    seqcast::kernels::set_parallel(true);
    const double t_dispatch = time_best_of(3, [&] {
        seqcast::kernels::matmul(a.data(), b.data(), c_parallel.data(), n, n, n);
    });

    const bool identical =
        std::memcmp(c_serial.data(), c_parallel.data(), n * n * sizeof(double)) == 0;
    const double flops = 2.0 * static_cast<double>(n) * n * n;
    std::printf("matmul %4zu^3   serial %8.3f ms (%6.2f GFLOP/s)   parallel %8.3f ms (%6.2f GFLOP/s)   speedup %5.2fx   %s\n",
                n, t_serial * 1e3, flops / t_serial / 1e9, t_dispatch * 1e3,
                flops / t_dispatch / 1e9, t_serial / t_dispatch,
                identical ? "bitwise-identical" : "MISMATCH");
}

void bench_elemwise(std::size_t n) {
    seqcast::core::Rng rng(99);
    const std::vector<double> a = random_vector(n, rng);
    const std::vector<double> b = random_vector(n, rng);
    std::vector<double> c_serial(n), c_parallel(n);

    const double t_serial =
        time_best_of(5, [&] { seqcast::kernels::serial::add(a.data(), b.data(), c_serial.data(), n); });
    seqcast::kernels::set_parallel(true);
    const double t_dispatch =
        time_best_of(5, [&] { seqcast::kernels::add(a.data(), b.data(), c_parallel.data(), n); });

    const bool identical = std::memcmp(c_serial.data(), c_parallel.data(), n * sizeof(double)) == 0;
    std::printf("add    n=%-8zu serial %8.3f ms                    parallel %8.3f ms                    speedup %5.2fx   %s\n",
                n, t_serial * 1e3, t_dispatch * 1e3, t_serial / t_dispatch,
                identical ? "bitwise-identical" : "MISMATCH");
}

/// Batched forecasting-model evaluation, the access pattern the attribution
/// samplers use: many read-only forwards writing to disjoint output slots.
void bench_batch_eval(std::size_t batch) {
    using namespace seqcast;
    const std::size_t seq_len = 10, n_features = 25;
    const ModelParams params = init_params(ModelKind::DLinear, seq_len, n_features, 42);

    core::Rng rng(1234);
    std::vector<std::vector<double>> windows(batch);
    for (auto& w : windows) w = random_vector(seq_len * n_features, rng);

    const auto eval_one = [&](std::size_t i, std::vector<double>& out) {
        FwdContext ctx;
        ctx.train = false;
        Tensor window = Tensor::from_values({seq_len, n_features}, windows[i], false);
        out[i] = model_forward(params, window, ctx).values()[0];
    };

    std::vector<double> serial_out(batch), parallel_out(batch);
    kernels::set_parallel(false);
    const double t_serial = time_best_of(3, [&] {
        for (std::size_t i = 0; i < batch; ++i) eval_one(i, serial_out);
    });
    kernels::set_parallel(true);
    const double t_parallel = time_best_of(3, [&] {
        kernels::parallel_for(batch, [&](std::size_t i) { eval_one(i, parallel_out); });
    });

    const bool identical =
        std::memcmp(serial_out.data(), parallel_out.data(), batch * sizeof(double)) == 0;
    std::printf("model eval x%-4zu serial %8.3f ms                    parallel %8.3f ms                    speedup %5.2fx   %s\n",
                batch, t_serial * 1e3, t_parallel * 1e3, t_serial / t_parallel,
                identical ? "bitwise-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef SEQCAST_HAVE_OPENMP
    std::printf("OpenMP backend compiled in; max threads = %d\n\n", omp_get_max_threads());
#else
    std::printf("OpenMP backend not compiled in; every path runs the serial reference\n\n");
#endif

    for (std::size_t n : {64, 128, 256}) bench_matmul(n);
    std::printf("\n");
    for (std::size_t n : {std::size_t{100000}, std::size_t{1000000}}) bench_elemwise(n);
    std::printf("\n");
    for (std::size_t b : {std::size_t{64}, std::size_t{256}}) bench_batch_eval(b);

    seqcast::kernels::set_parallel(true);
    return 0;
}
