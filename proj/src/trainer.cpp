#include "seqcast/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqcast/core/rng.hpp"

namespace seqcast {

namespace {

constexpr std::uint64_t kInitTag = 0x11;
constexpr std::uint64_t kShuffleTag = 0x5F;

Tensor window_tensor(const WindowSample& sample, std::size_t seq_len, std::size_t n_features) {
    return Tensor::from_values({seq_len, n_features}, sample.inputs, false);
}

std::size_t target_channel_of(const WindowedDataset& dataset) {
    for (std::size_t i = 0; i < dataset.feature_names.size(); ++i) {
        if (dataset.feature_names[i] == dataset.target_column) return i;
    }
    throw std::invalid_argument("dataset's target column '" + dataset.target_column +
                                "' is not among its features");
}

}  // namespace

TrainConfig default_config(ModelKind kind) {
    switch (kind) {
        case ModelKind::DLinear: return {100, 1e-3, 32, 10, 0.0, 42};
        case ModelKind::VanillaTransformer: return {50, 1e-4, 64, 10, 0.1, 42};
        case ModelKind::TST: return {50, 1e-4, 32, 5, 0.1, 42};
        case ModelKind::LSTNet: return {100, 1e-5, 64, 5, 0.2, 42};
    }
    throw std::logic_error("unreachable model kind");
}

AdamState make_adam_state(const ModelParams& params) {
    AdamState state;
    state.m.reserve(params.tensors.size());
    state.v.reserve(params.tensors.size());
    for (const auto& t : params.tensors) {
        state.m.emplace_back(t.size(), 0.0);
        state.v.emplace_back(t.size(), 0.0);
    }
    return state;
}

void adam_step(ModelParams& params, AdamState& state, double lr, double beta1, double beta2,
               double eps) {
    if (state.m.size() != params.tensors.size()) {
        throw std::invalid_argument("Adam state does not match the parameter list");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        Tensor& p = params.tensors[i];
        const std::vector<double>& g = p.node()->grad;  // may be unallocated (=> zero)
        std::vector<double>& m = state.m[i];
        std::vector<double>& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double gj = j < g.size() ? g[j] : 0.0;
            if (!std::isfinite(gj)) {
                throw std::runtime_error("non-finite gradient in tensor '" + params.names[i] + "'");
            }
            m[j] = beta1 * m[j] + (1.0 - beta1) * gj;
            v[j] = beta2 * v[j] + (1.0 - beta2) * gj * gj;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p.data()[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

double evaluate_loss(const ModelParams& params, const WindowedDataset& dataset,
                     std::uint64_t seed) {
    if (dataset.samples.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
    double acc = 0.0;
    for (const WindowSample& s : dataset.samples) {
        FwdContext ctx;
        ctx.train = false;
        ctx.seed = seed;
        Tensor out = model_forward(params, window_tensor(s, params.seq_len, params.n_features), ctx);
        const double err = out.values()[0] - s.target;
        acc += err * err;
    }
    return acc / static_cast<double>(dataset.samples.size());
}

TrainedModel train(ModelKind kind, const WindowedDataset& train_set,
                   const WindowedDataset& test_set, const TrainConfig& config,
                   const Scaler& scaler) {
    if (config.epochs == 0 || config.batch_size == 0) {
        throw std::invalid_argument("training needs epochs >= 1 and batch_size >= 1");
    }
    if (config.dropout < 0.0 || config.dropout >= 1.0) {
        throw std::invalid_argument("dropout must lie in [0, 1)");
    }
    if (!std::isfinite(config.learning_rate) || config.learning_rate < 0.0) {
        throw std::invalid_argument("learning rate must be finite and non-negative");
    }
    if (train_set.seq_len != config.seq_len || test_set.seq_len != config.seq_len) {
        throw std::invalid_argument(
            "dataset seq_len (" + std::to_string(train_set.seq_len) + " train, " +
            std::to_string(test_set.seq_len) + " test) does not match config seq_len " +
            std::to_string(config.seq_len));
    }
    if (train_set.feature_names != test_set.feature_names ||
        train_set.target_column != test_set.target_column) {
        throw std::invalid_argument("train and test sets disagree on features or target");
    }
    if (!train_set.normalized || !test_set.normalized) {
        throw std::invalid_argument("train() expects normalized datasets");
    }
    if (train_set.samples.empty() || test_set.samples.empty()) {
        throw std::invalid_argument("train() needs non-empty train and test sets");
    }

    const std::size_t n_features = train_set.n_features();
    ModelParams params = init_params(kind, config.seq_len, n_features,
                                     core::derive_stream(config.seed, kInitTag, 0));
    params.target_channel = target_channel_of(train_set);

    const WindowedDataset shuffled =
        shuffle_once(train_set, core::derive_stream(config.seed, kShuffleTag, 0));

    AdamState state = make_adam_state(params);
    const std::size_t n = shuffled.samples.size();
    const std::size_t n_batches = (n + config.batch_size - 1) / config.batch_size;

    std::vector<EpochLoss> curve;
    curve.reserve(config.epochs);
    std::uint64_t global_step = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_acc = 0.0;  // sample-weighted sum of batch losses
        for (std::size_t batch = 0; batch < n_batches; ++batch) {
            const std::size_t lo = batch * config.batch_size;
            const std::size_t hi = std::min(lo + config.batch_size, n);

            std::vector<Tensor> sq_errs;
            sq_errs.reserve(hi - lo);
            for (std::size_t s = lo; s < hi; ++s) {
                FwdContext ctx;
                ctx.train = true;
                ctx.dropout_rate = config.dropout;
                ctx.seed = config.seed;
                ctx.step = global_step;
                const WindowSample& sample = shuffled.samples[s];
                Tensor out =
                    model_forward(params, window_tensor(sample, config.seq_len, n_features), ctx);
                Tensor err = sub(out, Tensor::from_values({1}, {sample.target}, false));
                sq_errs.push_back(mul(err, err));
            }
            Tensor loss = mean(sq_errs.size() == 1 ? sq_errs[0] : concat(sq_errs, 0));
            const double loss_value = loss.values()[0];
            if (!std::isfinite(loss_value)) {
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(batch + 1));
            }
            epoch_acc += loss_value * static_cast<double>(hi - lo);

            backward(loss);
            adam_step(params, state, config.learning_rate);
            for (auto& t : params.tensors) t.zero_grad();
            ++global_step;
        }

        EpochLoss row;
        row.train_loss = epoch_acc / static_cast<double>(n);
        row.test_loss = evaluate_loss(params, test_set, config.seed);
        if (!std::isfinite(row.test_loss)) {
            throw std::runtime_error("non-finite test loss at epoch " + std::to_string(epoch + 1));
        }
        curve.push_back(row);
    }

    TrainedModel model;
    model.params = std::move(params);
    model.config = config;
    model.loss_curve = std::move(curve);
    model.scaler = scaler;
    return model;
}

std::vector<Prediction> predict(const TrainedModel& model, const WindowedDataset& dataset) {
    const ModelParams& params = model.params;
    if (dataset.seq_len != params.seq_len || dataset.n_features() != params.n_features) {
        throw std::invalid_argument("dataset window shape does not match the trained model");
    }
    if (!dataset.normalized) {
        throw std::invalid_argument("predict() expects a dataset normalized with the model's scaler");
    }
    // Scaler mismatch guard: every dataset feature must be a column the
    // model's scaler knows (find() throws otherwise).
    for (const auto& name : dataset.feature_names) model.scaler.find(name);

    std::vector<double> y_true_norm, y_pred_norm;
    y_true_norm.reserve(dataset.samples.size());
    y_pred_norm.reserve(dataset.samples.size());
    for (const WindowSample& s : dataset.samples) {
        FwdContext ctx;
        ctx.train = false;
        ctx.seed = model.config.seed;
        Tensor out = model_forward(params, window_tensor(s, params.seq_len, params.n_features), ctx);
        y_true_norm.push_back(s.target);
        y_pred_norm.push_back(out.values()[0]);
    }
    const std::vector<double> y_true = invert_minmax(model.scaler, dataset.target_column, y_true_norm);
    const std::vector<double> y_pred = invert_minmax(model.scaler, dataset.target_column, y_pred_norm);

    std::vector<Prediction> result(dataset.samples.size());
    for (std::size_t i = 0; i < result.size(); ++i) {
        result[i] = {dataset.samples[i].target_date, y_true[i], y_pred[i]};
    }
    return result;
}

}  // namespace seqcast
