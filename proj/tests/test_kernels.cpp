#include <cstring>
#include <vector>

#include "doctest.h"
#include "seqcast/core/rng.hpp"
#include "seqcast/kernels.hpp"

using namespace seqcast;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    core::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

/// Restores the process-wide backend toggle on scope exit.
struct BackendGuard {
    bool saved = kernels::parallel_enabled();
    ~BackendGuard() { kernels::set_parallel(saved); }
};

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("matmul value check against a plain triple loop") {
    const std::size_t m = 7, k = 5, n = 6;
    const auto a = random_vec(m * k, 1);
    const auto b = random_vec(k * n, 2);
    std::vector<double> got(m * n);
    kernels::serial::matmul(a.data(), b.data(), got.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
            REQUIRE(got[i * n + j] == doctest::Approx(acc).epsilon(1e-12));
        }
    }
}

TEST_CASE("matmul_nt and matmul_tn match explicit transposes") {
    const std::size_t m = 6, k = 4, n = 5;
    const auto a = random_vec(m * k, 3);
    const auto b = random_vec(n * k, 4);   // used as B^T source for nt
    const auto c_in = random_vec(m * n, 5);  // [m,n] operand for tn

    // nt: c[m,n] = a[m,k] * b[n,k]^T
    std::vector<double> got_nt(m * n);
    kernels::serial::matmul_nt(a.data(), b.data(), got_nt.data(), m, k, n);
    std::vector<double> bt(k * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < k; ++c) bt[c * n + r] = b[r * k + c];
    }
    std::vector<double> want_nt(m * n);
    kernels::serial::matmul(a.data(), bt.data(), want_nt.data(), m, k, n);
    for (std::size_t i = 0; i < m * n; ++i) {
        REQUIRE(got_nt[i] == doctest::Approx(want_nt[i]).epsilon(1e-12));
    }

    // tn: c[k,n] = a[m,k]^T * b[m,n]
    std::vector<double> got_tn(k * n);
    kernels::serial::matmul_tn(a.data(), c_in.data(), got_tn.data(), m, k, n);
    std::vector<double> at(k * m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < k; ++c) at[c * m + r] = a[r * k + c];
    }
    std::vector<double> want_tn(k * n);
    kernels::serial::matmul(at.data(), c_in.data(), want_tn.data(), k, m, n);
    for (std::size_t i = 0; i < k * n; ++i) {
        REQUIRE(got_tn[i] == doctest::Approx(want_tn[i]).epsilon(1e-12));
    }
}

TEST_CASE("elementwise kernels") {
    const std::size_t n = 257;
    const auto a = random_vec(n, 6);
    const auto b = random_vec(n, 7);
    std::vector<double> c(n);

    kernels::serial::add(a.data(), b.data(), c.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(c[i] == a[i] + b[i]);
    kernels::serial::sub(a.data(), b.data(), c.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(c[i] == a[i] - b[i]);
    kernels::serial::mul(a.data(), b.data(), c.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(c[i] == a[i] * b[i]);
    kernels::serial::scale(a.data(), 1.5, c.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(c[i] == a[i] * 1.5);
    std::vector<double> y = b;
    kernels::serial::axpy(0.25, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(y[i] == b[i] + 0.25 * a[i]);
}

#ifdef SEQCAST_HAVE_OPENMP
TEST_CASE("omp backend is bitwise-identical to the serial reference") {
    // Sizes straddle the dispatch grains so both code paths are exercised.
    const std::size_t shapes[][3] = {{9, 11, 13}, {64, 64, 64}, {128, 32, 96}};
    for (const auto& s : shapes) {
        const std::size_t m = s[0], k = s[1], n = s[2];
        const auto a = random_vec(m * k, 10 + m);
        const auto b = random_vec(k * n, 20 + n);
        std::vector<double> ref(m * n), par(m * n);
        kernels::serial::matmul(a.data(), b.data(), ref.data(), m, k, n);
        kernels::omp::matmul(a.data(), b.data(), par.data(), m, k, n);
        REQUIRE(bitwise_equal(ref, par));

        const auto bt = random_vec(n * k, 30 + n);
        std::vector<double> ref_nt(m * n), par_nt(m * n);
        kernels::serial::matmul_nt(a.data(), bt.data(), ref_nt.data(), m, k, n);
        kernels::omp::matmul_nt(a.data(), bt.data(), par_nt.data(), m, k, n);
        REQUIRE(bitwise_equal(ref_nt, par_nt));

        const auto bm = random_vec(m * n, 40 + m);
        std::vector<double> ref_tn(k * n), par_tn(k * n);
        kernels::serial::matmul_tn(a.data(), bm.data(), ref_tn.data(), m, k, n);
        kernels::omp::matmul_tn(a.data(), bm.data(), par_tn.data(), m, k, n);
        REQUIRE(bitwise_equal(ref_tn, par_tn));
    }

    for (std::size_t n : {std::size_t(1000), std::size_t(100000)}) {
        const auto a = random_vec(n, 50);
        const auto b = random_vec(n, 51);
        std::vector<double> ref(n), par(n);
        kernels::serial::add(a.data(), b.data(), ref.data(), n);
        kernels::omp::add(a.data(), b.data(), par.data(), n);
        REQUIRE(bitwise_equal(ref, par));
        kernels::serial::mul(a.data(), b.data(), ref.data(), n);
        kernels::omp::mul(a.data(), b.data(), par.data(), n);
        REQUIRE(bitwise_equal(ref, par));
        kernels::serial::scale(a.data(), -0.75, ref.data(), n);
        kernels::omp::scale(a.data(), -0.75, par.data(), n);
        REQUIRE(bitwise_equal(ref, par));
        std::vector<double> y1 = b, y2 = b;
        kernels::serial::axpy(2.0, a.data(), y1.data(), n);
        kernels::omp::axpy(2.0, a.data(), y2.data(), n);
        REQUIRE(bitwise_equal(y1, y2));
    }
}
#endif

TEST_CASE("dispatch result does not depend on the backend toggle") {
    BackendGuard guard;
    const std::size_t m = 48, k = 48, n = 48;  // above the matmul grain
    const auto a = random_vec(m * k, 60);
    const auto b = random_vec(k * n, 61);

    kernels::set_parallel(false);
    std::vector<double> off(m * n);
    kernels::matmul(a.data(), b.data(), off.data(), m, k, n);

    kernels::set_parallel(true);
    std::vector<double> on(m * n);
    kernels::matmul(a.data(), b.data(), on.data(), m, k, n);

    REQUIRE(bitwise_equal(off, on));
}

TEST_CASE("parallel_for covers every index exactly once, any backend") {
    BackendGuard guard;
    for (bool enabled : {false, true}) {
        kernels::set_parallel(enabled);
        const std::size_t n = 10007;
        std::vector<double> slots(n, -1.0);
        kernels::parallel_for(n, [&](std::size_t i) {
            slots[i] = static_cast<double>(i) * 0.5;
        });
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(slots[i] == static_cast<double>(i) * 0.5);
        }
    }
}

TEST_SUITE_END();
