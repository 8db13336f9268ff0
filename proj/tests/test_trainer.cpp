#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "seqcast/core/date.hpp"
#include "seqcast/trainer.hpp"

using namespace seqcast;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool params_bitwise_equal(const ModelParams& a, const ModelParams& b) {
    if (a.names != b.names) return false;
    for (std::size_t i = 0; i < a.tensors.size(); ++i) {
        if (!bitwise_equal(a.tensors[i].values(), b.tensors[i].values())) return false;
    }
    return true;
}

/// Normalized single-feature dataset tracing a smooth sine; easily learnable.
WindowedDataset sine_dataset(std::size_t n_samples, std::size_t seq_len,
                             std::size_t offset = 0) {
    WindowedDataset ds;
    ds.feature_names = {"close"};
    ds.seq_len = seq_len;
    ds.target_column = "close";
    ds.normalized = true;
    const auto value = [](std::size_t t) {
        return 0.5 + 0.4 * std::sin(static_cast<double>(t) / 3.0);
    };
    const core::Date base{2020, 1, 1};
    for (std::size_t s = 0; s < n_samples; ++s) {
        WindowSample sample;
        const std::size_t t0 = offset + s;
        for (std::size_t k = 0; k < seq_len; ++k) sample.inputs.push_back(value(t0 + k));
        sample.target = value(t0 + seq_len);
        sample.target_date = core::add_days(base, static_cast<int>(t0 + seq_len));
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

TrainConfig quick_config(std::size_t seq_len, std::size_t epochs, double lr,
                         std::size_t batch = 8, double dropout = 0.0) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.batch_size = batch;
    cfg.seq_len = seq_len;
    cfg.dropout = dropout;
    cfg.seed = 42;
    return cfg;
}

void zero_all_params(ModelParams& p) {
    for (Tensor& t : p.tensors) std::fill(t.values().begin(), t.values().end(), 0.0);
}

}  // namespace

TEST_SUITE_BEGIN("trainer");

TEST_CASE("default configurations match the tuning table") {
    const TrainConfig dl = default_config(ModelKind::DLinear);
    CHECK(dl.epochs == 100);
    CHECK(dl.learning_rate == 1e-3);
    CHECK(dl.batch_size == 32);
    CHECK(dl.seq_len == 10);
    CHECK(dl.dropout == 0.0);
    CHECK(dl.seed == 42);

    const TrainConfig va = default_config(ModelKind::VanillaTransformer);
    CHECK(va.epochs == 50);
    CHECK(va.learning_rate == 1e-4);
    CHECK(va.batch_size == 64);
    CHECK(va.seq_len == 10);
    CHECK(va.dropout == 0.1);
    CHECK(va.seed == 42);

    const TrainConfig ts = default_config(ModelKind::TST);
    CHECK(ts.epochs == 50);
    CHECK(ts.learning_rate == 1e-4);
    CHECK(ts.batch_size == 32);
    CHECK(ts.seq_len == 5);
    CHECK(ts.dropout == 0.1);
    CHECK(ts.seed == 42);

    const TrainConfig ln = default_config(ModelKind::LSTNet);
    CHECK(ln.epochs == 100);
    CHECK(ln.learning_rate == 1e-5);
    CHECK(ln.batch_size == 64);
    CHECK(ln.seq_len == 5);
    CHECK(ln.dropout == 0.2);
    CHECK(ln.seed == 42);
}

TEST_CASE("adam_step") {
    const auto fresh = [] {
        ModelParams p;
        p.names = {"w"};
        p.tensors = {Tensor::from_values({3}, {0.5, -0.4, 0.8}, true)};
        return p;
    };

    SUBCASE("first step reproduces the bias-corrected update exactly") {
        ModelParams p = fresh();
        const std::vector<double> before = p.tensors[0].values();
        const std::vector<double> grads{0.5, -2.0, 0.05};
        p.tensors[0].zero_grad();
        p.tensors[0].node()->grad = grads;
        AdamState state = make_adam_state(p);
        const double lr = 1e-3;
        adam_step(p, state, lr);
        CHECK(state.t == 1);
        for (std::size_t j = 0; j < 3; ++j) {
            const double g = grads[j];
            const double m = (1.0 - 0.9) * g;
            const double v = (1.0 - 0.999) * g * g;
            const double mhat = m / (1.0 - std::pow(0.9, 1.0));
            const double vhat = v / (1.0 - std::pow(0.999, 1.0));
            const double expected = before[j] - lr * mhat / (std::sqrt(vhat) + 1e-8);
            CHECK(p.tensors[0].values()[j] == expected);

            // magnitude: lr * |g| / (|g| + 1e-8), within a millionth of lr
            const double delta = std::fabs(p.tensors[0].values()[j] - before[j]);
            CHECK(delta <= lr);
            CHECK(delta >= lr * (1.0 - 1e-6));
        }
    }
    SUBCASE("a zero gradient moves nothing, bitwise") {
        ModelParams p = fresh();
        const std::vector<double> before = p.tensors[0].values();
        p.tensors[0].zero_grad();
        AdamState state = make_adam_state(p);
        adam_step(p, state, 1e-3);
        CHECK(bitwise_equal(p.tensors[0].values(), before));
    }
    SUBCASE("an unallocated gradient buffer counts as zero") {
        ModelParams p = fresh();
        const std::vector<double> before = p.tensors[0].values();
        AdamState state = make_adam_state(p);
        adam_step(p, state, 1e-3);
        CHECK(bitwise_equal(p.tensors[0].values(), before));
        CHECK(state.t == 1);
    }
    SUBCASE("a non-finite gradient aborts and names the tensor") {
        ModelParams p = fresh();
        p.tensors[0].zero_grad();
        p.tensors[0].node()->grad[1] = std::numeric_limits<double>::quiet_NaN();
        AdamState state = make_adam_state(p);
        CHECK_THROWS_WITH_AS(adam_step(p, state, 1e-3),
                             doctest::Contains("non-finite gradient"), std::runtime_error);
        ModelParams q = fresh();
        q.tensors[0].zero_grad();
        q.tensors[0].node()->grad[0] = std::numeric_limits<double>::infinity();
        AdamState s2 = make_adam_state(q);
        CHECK_THROWS_WITH_AS(adam_step(q, s2, 1e-3), doctest::Contains("'w'"),
                             std::runtime_error);
    }
    SUBCASE("a state built for other parameters is rejected") {
        ModelParams p = fresh();
        AdamState empty_state;
        CHECK_THROWS_AS(adam_step(p, empty_state, 1e-3), std::invalid_argument);
    }
}

TEST_CASE("train with a zero learning rate is an exact no-op on the parameters") {
    const std::size_t L = 5;
    const WindowedDataset train_set = sine_dataset(16, L);
    const WindowedDataset test_set = sine_dataset(4, L, 16);
    const Scaler scaler;

    TrainedModel one = train(ModelKind::DLinear, train_set, test_set,
                             quick_config(L, 1, 0.0), scaler);
    TrainedModel three = train(ModelKind::DLinear, train_set, test_set,
                               quick_config(L, 3, 0.0), scaler);

    CHECK(one.loss_curve.size() == 1);
    REQUIRE(three.loss_curve.size() == 3);
    // parameters never moved: both runs still hold the seed-42 initialization
    CHECK(params_bitwise_equal(one.params, three.params));
    // and the curve repeats the same entry every epoch
    for (const EpochLoss& e : three.loss_curve) {
        CHECK(std::memcmp(&e.train_loss, &three.loss_curve[0].train_loss, sizeof(double)) == 0);
        CHECK(std::memcmp(&e.test_loss, &three.loss_curve[0].test_loss, sizeof(double)) == 0);
    }
}

TEST_CASE("training is bitwise deterministic") {
    const std::size_t L = 5;
    const WindowedDataset train_set = sine_dataset(20, L);
    const WindowedDataset test_set = sine_dataset(5, L, 20);
    const TrainConfig cfg = quick_config(L, 3, 1e-3, 8, 0.1);
    const Scaler scaler;

    TrainedModel a = train(ModelKind::DLinear, train_set, test_set, cfg, scaler);
    TrainedModel b = train(ModelKind::DLinear, train_set, test_set, cfg, scaler);
    REQUIRE(params_bitwise_equal(a.params, b.params));
    REQUIRE(a.loss_curve.size() == b.loss_curve.size());
    for (std::size_t i = 0; i < a.loss_curve.size(); ++i) {
        CHECK(std::memcmp(&a.loss_curve[i].train_loss, &b.loss_curve[i].train_loss,
                          sizeof(double)) == 0);
        CHECK(std::memcmp(&a.loss_curve[i].test_loss, &b.loss_curve[i].test_loss,
                          sizeof(double)) == 0);
    }
}

TEST_CASE("an exploding loss aborts with the epoch and batch position") {
    WindowedDataset bad;
    bad.feature_names = {"close"};
    bad.seq_len = 2;
    bad.target_column = "close";
    bad.normalized = true;
    WindowSample s;
    s.inputs = {0.1, 0.2};
    s.target = 1e200;  // squared error overflows to infinity
    s.target_date = core::Date{2020, 1, 3};
    bad.samples = {s};

    CHECK_THROWS_WITH_AS(
        train(ModelKind::DLinear, bad, bad, quick_config(2, 1, 1e-3, 1), Scaler{}),
        doctest::Contains("epoch 1, batch 1"), std::runtime_error);
}

TEST_CASE("the loss curve trends down on an easy series") {
    const std::size_t L = 5;
    const WindowedDataset train_set = sine_dataset(40, L);
    const WindowedDataset test_set = sine_dataset(10, L, 40);
    TrainedModel m = train(ModelKind::DLinear, train_set, test_set,
                           quick_config(L, 6, 1e-3), Scaler{});
    REQUIRE(m.loss_curve.size() == 6);
    int drops = 0;
    for (std::size_t i = 0; i + 1 < 6 && i < 5; ++i) {
        if (m.loss_curve[i + 1].train_loss < m.loss_curve[i].train_loss) ++drops;
    }
    CHECK(drops >= 4);
    CHECK(m.loss_curve.back().train_loss < m.loss_curve.front().train_loss);
    for (const EpochLoss& e : m.loss_curve) {
        CHECK(std::isfinite(e.train_loss));
        CHECK(std::isfinite(e.test_loss));
    }
}

TEST_CASE("evaluate_loss of an all-zero model is the mean squared target") {
    const std::size_t L = 4;
    const WindowedDataset ds = sine_dataset(12, L);
    ModelParams p = init_params(ModelKind::DLinear, L, 1, 3);
    zero_all_params(p);

    double acc = 0.0;
    for (const WindowSample& s : ds.samples) acc += s.target * s.target;
    const double expected = acc / static_cast<double>(ds.samples.size());

    CHECK(evaluate_loss(p, ds, 42) == expected);

    WindowedDataset empty = ds;
    empty.samples.clear();
    CHECK_THROWS_AS(evaluate_loss(p, empty, 42), std::invalid_argument);
}

TEST_CASE("predict") {
    const std::size_t L = 3;
    // raw closes on a gentle ramp, normalized by their own min/max
    std::vector<double> raw;
    for (std::size_t t = 0; t < 20; ++t) raw.push_back(10.0 + 0.1 * static_cast<double>(t));
    const double lo = raw.front(), hi = raw.back();
    const auto norm = [&](double c) { return (c - lo) / (hi - lo); };

    Scaler scaler;
    scaler.columns.push_back({"close", lo, hi, false});

    WindowedDataset ds;
    ds.feature_names = {"close"};
    ds.seq_len = L;
    ds.target_column = "close";
    ds.normalized = true;
    const core::Date base{2021, 6, 1};
    for (std::size_t t = 0; t + L < raw.size(); ++t) {
        WindowSample s;
        for (std::size_t k = 0; k < L; ++k) s.inputs.push_back(norm(raw[t + k]));
        s.target = norm(raw[t + L]);
        s.target_date = core::add_days(base, static_cast<int>(t + L));
        ds.samples.push_back(std::move(s));
    }

    SUBCASE("after a short fit: one row per sample, true values in price units") {
        TrainedModel m = train(ModelKind::DLinear, ds, ds, quick_config(L, 2, 1e-3), scaler);
        const auto preds = predict(m, ds);
        REQUIRE(preds.size() == ds.samples.size());
        for (std::size_t i = 0; i < preds.size(); ++i) {
            CHECK(preds[i].target_date == ds.samples[i].target_date);
            CHECK(std::fabs(preds[i].y_true - raw[i + L]) < 1e-9);
            CHECK(std::isfinite(preds[i].y_pred));
        }
    }
    SUBCASE("a constant model forecasts one constant value") {
        TrainedModel m;
        m.params = init_params(ModelKind::DLinear, L, 1, 5);
        zero_all_params(m.params);
        m.config = quick_config(L, 1, 1e-3);
        m.scaler = scaler;
        const auto preds = predict(m, ds);
        REQUIRE(!preds.empty());
        for (const auto& p : preds) CHECK(p.y_pred == preds[0].y_pred);
    }
    SUBCASE("shape and normalization guards") {
        TrainedModel m = train(ModelKind::DLinear, ds, ds, quick_config(L, 1, 1e-3), scaler);
        WindowedDataset denorm = ds;
        denorm.normalized = false;
        CHECK_THROWS_WITH_AS(predict(m, denorm), doctest::Contains("normalized"),
                             std::invalid_argument);
        WindowedDataset wrong = sine_dataset(4, L + 1);
        CHECK_THROWS_WITH_AS(predict(m, wrong),
                             doctest::Contains("does not match the trained model"),
                             std::invalid_argument);
        WindowedDataset other = ds;
        other.feature_names = {"volume"};
        other.target_column = "volume";
        CHECK_THROWS_AS(predict(m, other), std::invalid_argument);
    }
}

TEST_CASE("train validates its inputs") {
    const std::size_t L = 5;
    const WindowedDataset train_set = sine_dataset(10, L);
    const WindowedDataset test_set = sine_dataset(3, L, 10);
    const Scaler scaler;

    TrainConfig cfg = quick_config(L, 1, 1e-3);
    cfg.dropout = 1.0;
    CHECK_THROWS_WITH_AS(train(ModelKind::DLinear, train_set, test_set, cfg, scaler),
                         doctest::Contains("dropout"), std::invalid_argument);

    cfg = quick_config(L, 0, 1e-3);
    CHECK_THROWS_AS(train(ModelKind::DLinear, train_set, test_set, cfg, scaler),
                    std::invalid_argument);

    cfg = quick_config(L, 1, 1e-3, 0);
    CHECK_THROWS_AS(train(ModelKind::DLinear, train_set, test_set, cfg, scaler),
                    std::invalid_argument);

    cfg = quick_config(L, 1, -1.0);
    CHECK_THROWS_WITH_AS(train(ModelKind::DLinear, train_set, test_set, cfg, scaler),
                         doctest::Contains("learning rate"), std::invalid_argument);

    cfg = quick_config(L, 1, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(train(ModelKind::DLinear, train_set, test_set, cfg, scaler),
                    std::invalid_argument);

    cfg = quick_config(L + 1, 1, 1e-3);
    CHECK_THROWS_WITH_AS(train(ModelKind::DLinear, train_set, test_set, cfg, scaler),
                         doctest::Contains("does not match config seq_len"),
                         std::invalid_argument);

    WindowedDataset denorm = train_set;
    denorm.normalized = false;
    CHECK_THROWS_WITH_AS(
        train(ModelKind::DLinear, denorm, test_set, quick_config(L, 1, 1e-3), scaler),
        doctest::Contains("normalized"), std::invalid_argument);

    WindowedDataset renamed = test_set;
    renamed.feature_names = {"volume"};
    CHECK_THROWS_WITH_AS(
        train(ModelKind::DLinear, train_set, renamed, quick_config(L, 1, 1e-3), scaler),
        doctest::Contains("disagree"), std::invalid_argument);

    WindowedDataset empty = train_set;
    empty.samples.clear();
    CHECK_THROWS_AS(train(ModelKind::DLinear, empty, test_set, quick_config(L, 1, 1e-3), scaler),
                    std::invalid_argument);

    WindowedDataset orphan = train_set;
    orphan.target_column = "nope";
    WindowedDataset orphan_test = test_set;
    orphan_test.target_column = "nope";
    CHECK_THROWS_WITH_AS(
        train(ModelKind::DLinear, orphan, orphan_test, quick_config(L, 1, 1e-3), scaler),
        doctest::Contains("not among its features"), std::invalid_argument);
}

TEST_CASE("every architecture completes a short fit") {
    const std::size_t L = 5;
    const WindowedDataset train_set = sine_dataset(6, L);
    const WindowedDataset test_set = sine_dataset(2, L, 6);
    Scaler scaler;
    scaler.columns.push_back({"close", 0.0, 1.0, false});

    for (ModelKind kind : {ModelKind::LSTNet, ModelKind::VanillaTransformer, ModelKind::TST}) {
        TrainConfig cfg = default_config(kind);
        cfg.epochs = 2;
        cfg.seq_len = L;
        cfg.batch_size = 4;
        TrainedModel m = train(kind, train_set, test_set, cfg, scaler);
        REQUIRE(m.loss_curve.size() == 2);
        for (const EpochLoss& e : m.loss_curve) {
            CHECK(std::isfinite(e.train_loss));
            CHECK(std::isfinite(e.test_loss));
        }
        CHECK(m.params.kind == kind);
        CHECK(m.params.seq_len == L);
        // the scaler travels with the model
        CHECK(m.scaler.find("close").max == 1.0);
    }
}

TEST_SUITE_END();
