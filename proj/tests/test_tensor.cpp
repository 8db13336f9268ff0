#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "seqcast/core/rng.hpp"
#include "seqcast/tensor.hpp"

using namespace seqcast;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -2.0, double hi = 2.0) {
    core::Rng rng(seed);
    std::vector<double> v(shape_size(shape));
    for (double& x : v) x = rng.uniform(lo, hi);
    return Tensor::from_values(std::move(shape), std::move(v));
}

/// Inputs with |x| >= margin, for ops with a kink at zero.
Tensor random_away_from_zero(Shape shape, std::uint64_t seed, double margin = 0.2) {
    core::Rng rng(seed);
    std::vector<double> v(shape_size(shape));
    for (double& x : v) {
        const double mag = rng.uniform(margin, 1.5);
        x = rng.uniform01() < 0.5 ? -mag : mag;
    }
    return Tensor::from_values(std::move(shape), std::move(v));
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

/// Reduces an arbitrary-shape output to the scalar loss grad_check needs,
/// with distinct per-element sensitivity.
Tensor squared_sum(const Tensor& t) { return sum(mul(t, t)); }

}  // namespace

TEST_SUITE_BEGIN("tensor");

TEST_CASE("construction and accessors") {
    Tensor z = Tensor::zeros({2, 3});
    CHECK(z.size() == 6);
    CHECK(z.rank() == 2);
    for (double v : z.values()) CHECK(v == 0.0);

    Tensor f = Tensor::full({2}, 1.5);
    CHECK(f.values() == std::vector<double>{1.5, 1.5});

    CHECK(Tensor::scalar(5.0).item() == 5.0);
    CHECK_THROWS_AS(Tensor::from_values({2}, {1.0, 2.0}).item(), std::invalid_argument);
    CHECK_THROWS_AS(Tensor::from_values({3}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor::zeros({2, 0}), std::invalid_argument);
}

TEST_CASE("elementwise forward values") {
    Tensor a = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b = Tensor::from_values({3}, {10, 20, 30});

    SUBCASE("add broadcasts a trailing vector over rows") {
        Tensor c = add(a, b);
        CHECK(c.shape() == Shape{2, 3});
        CHECK(c.values() == std::vector<double>{11, 22, 33, 14, 25, 36});
    }
    SUBCASE("sub and mul") {
        CHECK(sub(a, a).values() == std::vector<double>(6, 0.0));
        CHECK(mul(a, b).values() == std::vector<double>{10, 40, 90, 40, 100, 180});
    }
    SUBCASE("scalar constants and negation") {
        Tensor x = Tensor::from_values({2}, {1, 2});
        CHECK(addc(x, 0.5).values() == std::vector<double>{1.5, 2.5});
        CHECK(mulc(x, 2.0).values() == std::vector<double>{2, 4});
        CHECK(neg(x).values() == std::vector<double>{-1, -2});
    }
    SUBCASE("incompatible shapes throw") {
        Tensor bad = Tensor::from_values({2}, {1, 2});
        CHECK_THROWS_AS(add(a, bad), std::invalid_argument);
    }
}

TEST_CASE("matmul with the identity returns the operand unchanged") {
    Tensor eye = Tensor::from_values({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor a = random_tensor({3, 4}, 11);
    Tensor c = matmul(eye, a);
    REQUIRE(c.shape() == a.shape());
    CHECK(bitwise_equal(c.values(), a.values()));
    CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
}

TEST_CASE("shape manipulation forward values") {
    Tensor a = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});

    SUBCASE("transpose") {
        Tensor t = transpose(a);
        CHECK(t.shape() == Shape{3, 2});
        CHECK(t.values() == std::vector<double>{1, 4, 2, 5, 3, 6});
        CHECK_THROWS_AS(transpose(Tensor::from_values({2}, {1, 2})), std::invalid_argument);
    }
    SUBCASE("reshape keeps row-major order") {
        Tensor r = reshape(a, {3, 2});
        CHECK(r.shape() == Shape{3, 2});
        CHECK(r.values() == a.values());
        CHECK_THROWS_AS(reshape(a, Shape{4, 2}), std::invalid_argument);
    }
    SUBCASE("concat along each axis") {
        Tensor b = Tensor::from_values({1, 3}, {7, 8, 9});
        Tensor c0 = concat({a, b}, 0);
        CHECK(c0.shape() == Shape{3, 3});
        CHECK(c0.values() == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});

        Tensor col = Tensor::from_values({2, 1}, {-1, -2});
        Tensor c1 = concat({col, a}, 1);
        CHECK(c1.shape() == Shape{2, 4});
        CHECK(c1.values() == std::vector<double>{-1, 1, 2, 3, -2, 4, 5, 6});

        CHECK_THROWS_AS(concat({}, 0), std::invalid_argument);
        CHECK_THROWS_AS(concat({a, col}, 0), std::invalid_argument);
    }
    SUBCASE("slice takes a contiguous range") {
        Tensor s = slice(a, 1, 1, 2);
        CHECK(s.shape() == Shape{2, 2});
        CHECK(s.values() == std::vector<double>{2, 3, 5, 6});
        CHECK_THROWS_AS(slice(a, 1, 2, 2), std::invalid_argument);
    }
    SUBCASE("broadcast_to stretches size-1 axes") {
        Tensor v = Tensor::from_values({3}, {1, 2, 3});
        Tensor b = broadcast_to(v, {2, 3});
        CHECK(b.values() == std::vector<double>{1, 2, 3, 1, 2, 3});
    }
}

TEST_CASE("reductions") {
    Tensor v = Tensor::from_values({3}, {1, 2, 3});
    CHECK(sum(v).item() == 6.0);
    CHECK(mean(v).item() == 2.0);

    Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
    Tensor s0 = sum(a, 0, false);
    CHECK(s0.shape() == Shape{2});
    CHECK(s0.values() == std::vector<double>{4, 6});
    Tensor s0k = sum(a, 0, true);
    CHECK(s0k.shape() == Shape{1, 2});
    Tensor m1 = mean(a, 1, false);
    CHECK(m1.values() == std::vector<double>{1.5, 3.5});
}

TEST_CASE("nonlinearity forward values") {
    Tensor x = Tensor::from_values({3}, {-1.0, 0.0, 2.0});
    CHECK(relu(x).values() == std::vector<double>{0, 0, 2});
    CHECK(seqcast::tanh(Tensor::scalar(0.0)).item() == 0.0);
    CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
    CHECK(seqcast::exp(Tensor::scalar(0.0)).item() == 1.0);
    CHECK(seqcast::log(Tensor::scalar(1.0)).item() == 0.0);
    CHECK(powc(Tensor::scalar(4.0), 0.5).item() == 2.0);
}

TEST_CASE("softmax of a constant row is uniform") {
    Tensor x = Tensor::from_values({3}, {0, 0, 0});
    Tensor s = softmax(x, 0);
    for (double v : s.values()) CHECK(v == 1.0 / 3.0);

    Tensor r = random_tensor({2, 5}, 21);
    Tensor sr = softmax(r, 1);
    for (std::size_t row = 0; row < 2; ++row) {
        double total = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            const double v = sr.values()[row * 5 + j];
            CHECK(v > 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("layer_norm standardizes along the axis") {
    Tensor x = random_tensor({8}, 31);
    Tensor y = layer_norm(x, 0);
    double m = 0.0;
    for (double v : y.values()) m += v;
    m /= 8.0;
    CHECK(std::fabs(m) < 1e-12);
    double var = 0.0;
    for (double v : y.values()) var += (v - m) * (v - m);
    var /= 8.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("masked_fill replaces flagged slots and passes no gradient there") {
    Tensor x = Tensor::from_values({3}, {1, 2, 3}, true);
    Tensor y = masked_fill(x, {0, 1, 0}, -9.0);
    CHECK(y.values() == std::vector<double>{1, -9, 3});
    backward(sum(y));
    CHECK(x.grad() == std::vector<double>{1, 0, 1});
    CHECK_THROWS_AS(masked_fill(x, {0, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("linear matches matmul plus broadcast bias") {
    Tensor x = Tensor::from_values({2, 2}, {1, 2, 3, 4});
    Tensor w = Tensor::from_values({2, 2}, {1, 0, 0, 1});
    Tensor b = Tensor::from_values({2}, {10, 20});
    Tensor y = linear(x, w, b);
    CHECK(y.values() == std::vector<double>{11, 22, 13, 24});
}

TEST_CASE("dropout") {
    Tensor x = random_tensor({1000}, 41);

    SUBCASE("rate zero and eval mode are exact identities") {
        Tensor train0 = dropout(x, 0.0, 7, true);
        CHECK(train0.node() == x.node());
        Tensor eval = dropout(x, 0.5, 7, false);
        CHECK(eval.node() == x.node());
    }
    SUBCASE("train mode zeroes or rescales every element") {
        const double rate = 0.5;
        Tensor y = dropout(x, rate, 7, true);
        const double keep = 1.0 / (1.0 - rate);
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = y.values()[i];
            const bool dropped = v == 0.0;
            if (dropped) ++zeros;
            CHECK((dropped || v == x.values()[i] * keep));
        }
        // Binomial(1000, 0.5): five sigma is about 80 draws.
        CHECK(zeros > 400);
        CHECK(zeros < 600);
    }
    SUBCASE("the mask is a pure function of the stream seed") {
        Tensor a = dropout(x, 0.3, 99, true);
        Tensor b = dropout(x, 0.3, 99, true);
        CHECK(bitwise_equal(a.values(), b.values()));
        Tensor c = dropout(x, 0.3, 100, true);
        CHECK_FALSE(bitwise_equal(a.values(), c.values()));
    }
    SUBCASE("invalid rates throw") {
        CHECK_THROWS_AS(dropout(x, 1.0, 7, true), std::invalid_argument);
        CHECK_THROWS_AS(dropout(x, -0.1, 7, true), std::invalid_argument);
    }
}

TEST_CASE("backward basics") {
    SUBCASE("gradient of a plain sum is all ones") {
        Tensor x = Tensor::from_values({4}, {1, 2, 3, 4}, true);
        backward(sum(x));
        CHECK(x.grad() == std::vector<double>(4, 1.0));
    }
    SUBCASE("d(x*x)/dx at 3 is 6") {
        Tensor x = Tensor::from_values({1}, {3.0}, true);
        backward(mul(x, x));
        CHECK(x.grad() == std::vector<double>{6.0});
    }
    SUBCASE("a parameter outside the graph keeps an empty or zero gradient") {
        Tensor x = Tensor::from_values({2}, {1, 2}, true);
        Tensor unused = Tensor::from_values({2}, {5, 5}, true);
        backward(sum(mul(x, x)));
        CHECK(x.grad() == std::vector<double>{2, 4});
        for (double g : unused.grad()) CHECK(g == 0.0);  // empty or zeros
    }
    SUBCASE("backward accumulates across calls until zero_grad") {
        Tensor x = Tensor::from_values({1}, {2.0}, true);
        backward(sum(x));
        backward(sum(x));
        CHECK(x.grad() == std::vector<double>{2.0});
        x.zero_grad();
        CHECK(x.grad() == std::vector<double>{0.0});
    }
    SUBCASE("non-scalar losses are rejected") {
        Tensor x = Tensor::from_values({2}, {1, 2}, true);
        CHECK_THROWS_WITH_AS(backward(add(x, x)), doctest::Contains("scalar"),
                             std::invalid_argument);
    }
    SUBCASE("a node reused twice accumulates both contributions") {
        Tensor x = Tensor::from_values({1}, {3.0}, true);
        Tensor y = add(mul(x, x), x);  // x^2 + x, derivative 2x + 1 = 7
        backward(y);
        CHECK(x.grad() == std::vector<double>{7.0});
    }
}

TEST_CASE("backward is bitwise deterministic") {
    auto run = [](std::vector<double>& gx, std::vector<double>& gw) {
        Tensor x = random_tensor({4, 6}, 71);
        Tensor w = random_tensor({6, 3}, 72);
        x.set_requires_grad(true);
        w.set_requires_grad(true);
        Tensor h = seqcast::tanh(matmul(x, w));
        Tensor s = softmax(h, 1);
        Tensor loss = mean(mul(s, s));
        backward(loss);
        gx = x.grad();
        gw = w.grad();
    };
    std::vector<double> gx1, gw1, gx2, gw2;
    run(gx1, gw1);
    run(gx2, gw2);
    REQUIRE(bitwise_equal(gx1, gx2));
    REQUIRE(bitwise_equal(gw1, gw2));
}

TEST_CASE("gradient check: benchmark cases") {
    SUBCASE("x squared") {
        Tensor x = Tensor::from_values({1}, {3.0});
        const double err = grad_check([](const Tensor& t) { return mul(t, t); }, x);
        CHECK(err < 1e-9);
    }
    SUBCASE("softmax feeding mean squared error, 4x4") {
        Tensor target = random_tensor({4, 4}, 81, 0.0, 1.0);
        Tensor x = random_tensor({4, 4}, 82);
        const double err = grad_check(
            [&](const Tensor& t) {
                Tensor d = sub(softmax(t, 1), target);
                return mean(mul(d, d));
            },
            x);
        CHECK(err < 1e-6);
    }
    SUBCASE("layer_norm on an 8-vector") {
        Tensor coef = random_tensor({8}, 83, 0.5, 1.5);
        Tensor x = random_tensor({8}, 84);
        const double err = grad_check(
            [&](const Tensor& t) { return sum(mul(layer_norm(t, 0), coef)); }, x);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("gradient check: every primitive against central differences") {
    const double tol = 1e-4;
    Tensor other23 = random_tensor({2, 3}, 90);
    Tensor other3 = random_tensor({3}, 91);

    SUBCASE("add / sub / mul, including broadcast operands") {
        Tensor x = random_tensor({2, 3}, 92);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(add(t, other23)); }, x) < tol);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(sub(other23, t)); }, x) < tol);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(mul(t, other23)); }, x) < tol);
        Tensor v = random_tensor({3}, 93);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(add(other23, t)); }, v) < tol);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(mul(other23, t)); }, v) < tol);
    }
    SUBCASE("scalar constant ops") {
        Tensor x = random_tensor({5}, 94);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(addc(t, 0.7)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(mulc(t, -1.3)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(neg(t)); }, x) < tol);
    }
    SUBCASE("matmul with respect to each operand") {
        Tensor a = random_tensor({3, 4}, 95);
        Tensor b = random_tensor({4, 2}, 96);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(matmul(t, b)); }, a) < tol);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(matmul(a, t)); }, b) < tol);
    }
    SUBCASE("shape ops route gradients back to the right slots") {
        Tensor x = random_tensor({2, 3}, 97);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(transpose(t)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(reshape(t, {3, 2})); }, x) < tol);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(concat({t, other23}, 0)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(slice(t, 1, 1, 2)); }, x) < tol);
        Tensor v = random_tensor({3}, 98);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(broadcast_to(t, {4, 3})); }, v) < tol);
    }
    SUBCASE("reductions") {
        Tensor x = random_tensor({2, 3}, 99);
        CHECK(grad_check([](const Tensor& t) { return mul(sum(t), sum(t)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return mul(mean(t), mean(t)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(sum(t, 0, false)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(sum(t, 1, true)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(mean(t, 1, false)); }, x) < tol);
    }
    SUBCASE("pointwise nonlinearities") {
        Tensor x = random_away_from_zero({6}, 100);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(relu(t)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(seqcast::tanh(t)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(sigmoid(t)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(seqcast::exp(t)); }, x) < tol);
        Tensor pos = random_tensor({6}, 101, 0.5, 2.0);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(seqcast::log(t)); }, pos) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(powc(t, 1.7)); }, pos) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(powc(t, 2.0)); }, x) < tol);
    }
    SUBCASE("softmax and layer_norm over a matrix axis") {
        Tensor x = random_tensor({3, 4}, 102);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(softmax(t, 1)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(layer_norm(t, 1)); }, x) < tol);
    }
    SUBCASE("masked_fill and dropout with a frozen mask") {
        Tensor x = random_tensor({6}, 103);
        const std::vector<unsigned char> mask{0, 1, 0, 0, 1, 0};
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(masked_fill(t, mask, 0.5)); }, x) < tol);
        CHECK(grad_check([](const Tensor& t) { return squared_sum(dropout(t, 0.4, 55, true)); }, x) < tol);
    }
    SUBCASE("linear with respect to input, weight, and bias") {
        Tensor x = random_tensor({3, 4}, 104);
        Tensor w = random_tensor({4, 2}, 105);
        Tensor b = random_tensor({2}, 106);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(linear(t, w, b)); }, x) < tol);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(linear(x, t, b)); }, w) < tol);
        CHECK(grad_check([&](const Tensor& t) { return squared_sum(linear(x, w, t)); }, b) < tol);
    }
}

TEST_CASE("grad_check_params covers parameter sets with unused entries") {
    Tensor w = random_tensor({3}, 110);
    Tensor unused = random_tensor({2}, 111);
    const double err = grad_check_params(
        [&]() { return sum(mul(w, w)); }, {w, unused});
    CHECK(err < 1e-6);
}

TEST_SUITE_END();
