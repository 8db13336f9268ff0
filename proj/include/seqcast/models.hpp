#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqcast/tensor.hpp"

namespace seqcast {

/// The four forecasting architectures. Each consumes a (seq_len x n_features)
/// window and emits a one-step scalar forecast of the target column.
enum class ModelKind { DLinear, LSTNet, VanillaTransformer, TST };

std::string kind_name(ModelKind kind);
ModelKind parse_kind(const std::string& name);  // throws on unknown names

struct ModelHyper {
    // transformer family
    std::size_t d_model = 32;
    std::size_t n_heads = 4;
    std::size_t n_layers = 2;
    std::size_t d_ff = 64;
    // LSTNet
    std::size_t conv_filters = 16;
    std::size_t conv_width = 3;
    std::size_t rnn_hidden = 32;
    std::size_t skip = 2;
    std::size_t ar_window = 5;  // clamped to seq_len at construction
    // DLinear
    std::size_t decomp_kernel = 25;  // clamped to the largest odd value <= 2L-1
};

/// Named, ordered parameter tensors plus the structure they were built for.
/// The order is the registration order and is what the optimizer state and
/// checkpoint format align with.
struct ModelParams {
    ModelKind kind = ModelKind::DLinear;
    std::size_t seq_len = 0;
    std::size_t n_features = 0;
    std::size_t target_channel = 0;  // window column holding the forecast target
    ModelHyper hyper;
    std::vector<std::string> names;
    std::vector<Tensor> tensors;  // parallel to names

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    std::size_t total_parameters() const;
};

/// Everything a forward pass needs to know beyond the window itself. Dropout
/// masks are a pure function of (seed, site, step): `site` counts dropout
/// applications within one forward pass, so masks never depend on batch
/// composition or order.
struct FwdContext {
    bool train = false;
    double dropout_rate = 0.0;
    std::uint64_t seed = 42;
    std::uint64_t step = 0;
    mutable std::uint64_t site = 0;
    /// When set, forwards snapshot named intermediate activations into it
    /// (used by the causality tests).
    std::map<std::string, std::vector<double>>* capture = nullptr;
};

/// Splits an L x C window into a moving-average trend (edge-replicated
/// padding, odd kernel) and the remainder, with trend + remainder
/// recomposing the window exactly.
std::pair<Tensor, Tensor> series_decompose(const Tensor& window, std::size_t kernel);

/// PE(pos, 2i) = sin(pos/10000^(2i/d)), PE(pos, 2i+1) = cos(same); d even.
Tensor sinusoidal_encoding(std::size_t seq_len, std::size_t d_model);

/// Scaled dot-product multi-head attention over already-projected Q, K, V of
/// shape [rows, d_model]: per head softmax(QK^T/sqrt(d_head))V with masked
/// score cells filled to -1e30 (zero weight after softmax), heads
/// concatenated. The output projection belongs to the caller.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 const std::vector<unsigned char>* mask, std::size_t n_heads);

/// mask[i*L+j] = 1 iff j > i: position i may only attend to positions <= i.
std::vector<unsigned char> causal_mask(std::size_t seq_len);

Tensor dlinear_forward(const ModelParams& params, const Tensor& window, const FwdContext& ctx);
Tensor lstnet_forward(const ModelParams& params, const Tensor& window, const FwdContext& ctx);
Tensor vanilla_forward(const ModelParams& params, const Tensor& window, const FwdContext& ctx);
Tensor tst_forward(const ModelParams& params, const Tensor& window, const FwdContext& ctx);

/// Dispatches on params.kind after validating the window shape.
Tensor model_forward(const ModelParams& params, const Tensor& window, const FwdContext& ctx);

/// Glorot-uniform weights (a = sqrt(6/(fan_in+fan_out)) per tensor), zero
/// biases, unit layer-norm scales; fully determined by the seed.
ModelParams init_params(ModelKind kind, std::size_t seq_len, std::size_t n_features,
                        std::uint64_t seed, ModelHyper hyper = {});

// Checkpoints: JSON record of kind, structure, and raw parameter arrays.
// Doubles are emitted with round-trip precision, so load(save(p)) is bitwise.
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

}  // namespace seqcast
