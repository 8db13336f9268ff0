#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqcast/models.hpp"
#include "seqcast/pipeline.hpp"

namespace seqcast {

/// One training recipe. The defaults for each architecture come from the
/// per-model tuning table; see default_config.
struct TrainConfig {
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t seq_len = 10;
    double dropout = 0.0;  // in [0,1)
    std::uint64_t seed = 42;
};

struct EpochLoss {
    double train_loss = 0.0;
    double test_loss = 0.0;
};

/// A fitted model plus everything needed to reuse it: the recipe, the
/// per-epoch loss curve, and the scaler that de-normalizes its outputs.
struct TrainedModel {
    ModelParams params;
    TrainConfig config;
    std::vector<EpochLoss> loss_curve;  // length = config.epochs
    Scaler scaler;
};

/// The tuned per-architecture settings (epochs, learning rate, batch size,
/// sequence length, dropout); seed defaults to 42 everywhere.
TrainConfig default_config(ModelKind kind);

/// Adam first/second moment buffers, parallel to ModelParams::tensors.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t t = 0;  // completed steps
};

AdamState make_adam_state(const ModelParams& params);

/// One bias-corrected Adam update from the gradients currently stored in the
/// parameter tensors. A parameter whose gradient was never touched this step
/// is treated as having a zero gradient. Throws when any gradient is
/// non-finite, naming the offending tensor.
void adam_step(ModelParams& params, AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

/// Mean squared error between eval-mode forecasts and stored targets, in
/// normalized units.
double evaluate_loss(const ModelParams& params, const WindowedDataset& dataset,
                     std::uint64_t seed);

/// Full training loop: shuffle the training set once, then run fixed-order
/// mini-batches (final partial batch kept, weighted by its true size in the
/// epoch mean) for config.epochs epochs. The loss is MSE on the normalized
/// target; dropout is active only in training passes; the per-epoch test
/// loss is an eval-mode pass over the whole test set. Deterministic given
/// (datasets, config): repeated calls agree bitwise.
TrainedModel train(ModelKind kind, const WindowedDataset& train_set,
                   const WindowedDataset& test_set, const TrainConfig& config,
                   const Scaler& scaler);

struct Prediction {
    core::Date target_date;
    double y_true = 0.0;  // de-normalized (price units)
    double y_pred = 0.0;  // de-normalized (price units)
};

/// Eval-mode forecasts for every sample, de-normalized to price units along
/// with the stored targets.
std::vector<Prediction> predict(const TrainedModel& model, const WindowedDataset& dataset);

}  // namespace seqcast
