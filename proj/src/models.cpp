#include "seqcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "seqcast/core/csv.hpp"
#include "seqcast/core/rng.hpp"

namespace seqcast {

std::string kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::DLinear: return "dlinear";
        case ModelKind::LSTNet: return "lstnet";
        case ModelKind::VanillaTransformer: return "vanilla";
        case ModelKind::TST: return "tst";
    }
    return "?";
}

ModelKind parse_kind(const std::string& name) {
    std::string s;
    for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "dlinear") return ModelKind::DLinear;
    if (s == "lstnet") return ModelKind::LSTNet;
    if (s == "vanilla" || s == "vanilla_transformer" || s == "vanillatransformer") {
        return ModelKind::VanillaTransformer;
    }
    if (s == "tst" || s == "time_series_transformer") return ModelKind::TST;
    throw std::invalid_argument("unknown model kind '" + name +
                                "' (expected dlinear, lstnet, vanilla, or tst)");
}

Tensor& ModelParams::at(const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return tensors[i];
    }
    throw std::invalid_argument("model has no parameter '" + name + "'");
}

const Tensor& ModelParams::at(const std::string& name) const {
    return const_cast<ModelParams*>(this)->at(name);
}

std::size_t ModelParams::total_parameters() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
}

// ---- building blocks -------------------------------------------------------

std::pair<Tensor, Tensor> series_decompose(const Tensor& window, std::size_t kernel) {
    if (!window.defined() || window.rank() != 2) {
        throw std::invalid_argument("series_decompose expects an L x C window");
    }
    if (kernel % 2 == 0 || kernel == 0) {
        throw std::invalid_argument("decomposition kernel must be odd, got " + std::to_string(kernel));
    }
    const std::size_t L = window.shape()[0], C = window.shape()[1];
    if (kernel > 2 * L - 1) {
        throw std::invalid_argument("decomposition kernel " + std::to_string(kernel) +
                                    " exceeds 2L-1 = " + std::to_string(2 * L - 1));
    }

    // Trend: per-row neighborhood mean with edge replication. A bespoke node
    // (rather than a matmul against an averaging matrix) so that an all-equal
    // neighborhood yields the common value exactly.
    auto src = window.node();
    auto node = std::make_shared<Node>();
    node->shape = {L, C};
    node->data.resize(L * C);
    const long h = static_cast<long>(kernel / 2);
    const long last = static_cast<long>(L) - 1;
    for (long t = 0; t <= last; ++t) {
        for (std::size_t c = 0; c < C; ++c) {
            const double first = src->data[static_cast<std::size_t>(std::clamp(t - h, 0L, last)) * C + c];
            bool constant = true;
            double acc = 0.0;
            for (long j = t - h; j <= t + h; ++j) {
                const double v = src->data[static_cast<std::size_t>(std::clamp(j, 0L, last)) * C + c];
                constant = constant && v == first;
                acc += v;
            }
            node->data[static_cast<std::size_t>(t) * C + c] =
                constant ? first : acc / static_cast<double>(kernel);
        }
    }
    node->requires_grad = src->requires_grad;
    node->parents = {src};
    if (node->requires_grad) {
        node->backward = [src, L, C, h, kernel](Node& self) {
            if (src->grad.size() != src->data.size()) src->grad.assign(src->data.size(), 0.0);
            const double inv = 1.0 / static_cast<double>(kernel);
            const long last = static_cast<long>(L) - 1;
            for (long t = 0; t <= last; ++t) {
                for (std::size_t c = 0; c < C; ++c) {
                    const double g = self.grad[static_cast<std::size_t>(t) * C + c] * inv;
                    for (long j = t - h; j <= t + h; ++j) {
                        src->grad[static_cast<std::size_t>(std::clamp(j, 0L, last)) * C + c] += g;
                    }
                }
            }
        };
    }
    Tensor trend0(node);

    // One refinement round so that trend + remainder recomposes the window
    // bitwise (exact whenever trend and window share a magnitude regime,
    // which windowed means of the same rows always do).
    Tensor r0 = sub(window, trend0);
    Tensor trend = sub(window, r0);
    Tensor remainder = sub(window, trend);
    return {trend, remainder};
}

Tensor sinusoidal_encoding(std::size_t seq_len, std::size_t d_model) {
    if (d_model == 0 || d_model % 2 != 0) {
        throw std::invalid_argument("sinusoidal encoding needs an even d_model, got " +
                                    std::to_string(d_model));
    }
    Tensor pe = Tensor::zeros({seq_len, d_model});
    for (std::size_t pos = 0; pos < seq_len; ++pos) {
        for (std::size_t i = 0; i < d_model / 2; ++i) {
            const double angle = static_cast<double>(pos) /
                                 std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d_model));
            pe.data()[pos * d_model + 2 * i] = std::sin(angle);
            pe.data()[pos * d_model + 2 * i + 1] = std::cos(angle);
        }
    }
    return pe;
}

std::vector<unsigned char> causal_mask(std::size_t seq_len) {
    std::vector<unsigned char> mask(seq_len * seq_len, 0);
    for (std::size_t i = 0; i < seq_len; ++i) {
        for (std::size_t j = i + 1; j < seq_len; ++j) mask[i * seq_len + j] = 1;
    }
    return mask;
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 const std::vector<unsigned char>* mask, std::size_t n_heads) {
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) {
        throw std::invalid_argument("attention expects 2-D Q, K, V");
    }
    const std::size_t d = q.shape()[1];
    if (k.shape()[1] != d || v.shape()[1] != d || k.shape()[0] != v.shape()[0]) {
        throw std::invalid_argument("attention shape mismatch: Q" + shape_str(q.shape()) + " K" +
                                    shape_str(k.shape()) + " V" + shape_str(v.shape()));
    }
    if (n_heads == 0 || d % n_heads != 0) {
        throw std::invalid_argument("d_model " + std::to_string(d) + " is not divisible by n_heads " +
                                    std::to_string(n_heads));
    }
    const std::size_t rows_q = q.shape()[0], rows_k = k.shape()[0];
    if (mask && mask->size() != rows_q * rows_k) {
        throw std::invalid_argument("attention mask size " + std::to_string(mask->size()) +
                                    " does not match " + std::to_string(rows_q * rows_k) + " score cells");
    }
    const std::size_t d_head = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

    std::vector<Tensor> heads;
    heads.reserve(n_heads);
    for (std::size_t h = 0; h < n_heads; ++h) {
        Tensor qh = slice(q, 1, h * d_head, d_head);
        Tensor kh = slice(k, 1, h * d_head, d_head);
        Tensor vh = slice(v, 1, h * d_head, d_head);
        Tensor scores = mulc(matmul(qh, transpose(kh)), scale);
        if (mask) scores = masked_fill(scores, *mask, -1e30);
        heads.push_back(matmul(softmax(scores, 1), vh));
    }
    return heads.size() == 1 ? heads[0] : concat(heads, 1);
}

namespace {

/// Applies the context's dropout at the next site. The site counter advances
/// in eval mode too, so site numbering is independent of the mode.
Tensor ctx_dropout(const Tensor& t, const FwdContext& ctx) {
    const std::uint64_t site = ctx.site++;
    if (!ctx.train || ctx.dropout_rate == 0.0) return t;
    return dropout(t, ctx.dropout_rate, core::derive_stream(ctx.seed, 0xD20 + site, ctx.step), true);
}

struct GruWeights {
    Tensor wz, wr, wh, uz, ur, uh, bz, br, bh;
};

GruWeights gru_weights(const ModelParams& p, const std::string& prefix) {
    return {p.at(prefix + "wz"), p.at(prefix + "wr"), p.at(prefix + "wh"),
            p.at(prefix + "uz"), p.at(prefix + "ur"), p.at(prefix + "uh"),
            p.at(prefix + "bz"), p.at(prefix + "br"), p.at(prefix + "bh")};
}

/// One gated recurrent step: x [1,F], h [1,H] -> new h [1,H].
Tensor gru_cell(const Tensor& x, const Tensor& h, const GruWeights& w) {
    Tensor z = sigmoid(add(add(matmul(x, w.wz), matmul(h, w.uz)), w.bz));
    Tensor r = sigmoid(add(add(matmul(x, w.wr), matmul(h, w.ur)), w.br));
    Tensor cand = tanh(add(add(matmul(x, w.wh), matmul(mul(r, h), w.uh)), w.bh));
    return add(h, mul(z, sub(cand, h)));  // (1-z)*h + z*cand
}

/// Post-LN encoder blocks shared by the two transformer variants.
Tensor encoder_stack(const ModelParams& p, Tensor x, const std::vector<unsigned char>* mask,
                     const FwdContext& ctx, const char* tag) {
    for (std::size_t i = 0; i < p.hyper.n_layers; ++i) {
        const std::string b = "layer" + std::to_string(i) + "_";
        Tensor qm = linear(x, p.at(b + "wq"), p.at(b + "bq"));
        Tensor km = linear(x, p.at(b + "wk"), p.at(b + "bk"));
        Tensor vm = linear(x, p.at(b + "wv"), p.at(b + "bv"));
        Tensor att = linear(attention(qm, km, vm, mask, p.hyper.n_heads), p.at(b + "wo"), p.at(b + "bo"));
        x = add(x, ctx_dropout(att, ctx));
        x = add(mul(layer_norm(x, 1), p.at(b + "ln1_g")), p.at(b + "ln1_b"));
        Tensor ff = linear(relu(linear(x, p.at(b + "w1"), p.at(b + "b1"))), p.at(b + "w2"), p.at(b + "b2"));
        x = add(x, ctx_dropout(ff, ctx));
        x = add(mul(layer_norm(x, 1), p.at(b + "ln2_g")), p.at(b + "ln2_b"));
        if (ctx.capture) {
            (*ctx.capture)[std::string(tag) + "_layer" + std::to_string(i)] = x.values();
        }
    }
    return x;
}

void check_window(const ModelParams& p, const Tensor& window, const char* op) {
    if (!window.defined() || window.rank() != 2 || window.shape()[0] != p.seq_len ||
        window.shape()[1] != p.n_features) {
        throw std::invalid_argument(std::string(op) + ": window shape " +
                                    (window.defined() ? shape_str(window.shape()) : "(undefined)") +
                                    " does not match model (" + std::to_string(p.seq_len) + "," +
                                    std::to_string(p.n_features) + ")");
    }
}

}  // namespace

// ---- forwards ---------------------------------------------------------------

Tensor dlinear_forward(const ModelParams& p, const Tensor& window, const FwdContext& ctx) {
    check_window(p, window, "dlinear_forward");
    auto [trend, remainder] = series_decompose(window, p.hyper.decomp_kernel);
    // per channel: dot its L-vector against the channel's dedicated head
    Tensor trend_heads = sum(mul(transpose(trend), p.at("trend_w")), 1, false);        // [C]
    Tensor season_heads = sum(mul(transpose(remainder), p.at("season_w")), 1, false);  // [C]
    Tensor per_channel = add(add(trend_heads, season_heads), p.at("channel_b"));
    Tensor heads = ctx_dropout(reshape(per_channel, {1, p.n_features}), ctx);
    Tensor out = add(matmul(heads, p.at("agg_w")), p.at("agg_b"));  // learned aggregation
    return reshape(out, {1});
}

Tensor lstnet_forward(const ModelParams& p, const Tensor& window, const FwdContext& ctx) {
    check_window(p, window, "lstnet_forward");
    const std::size_t L = p.seq_len, C = p.n_features;
    const std::size_t w = p.hyper.conv_width, H = p.hyper.rnn_hidden, sp = p.hyper.skip;
    const std::size_t q = p.hyper.ar_window;
    const std::size_t conv_len = L - w + 1;

    // temporal convolution across all channels
    std::vector<Tensor> conv_rows;
    conv_rows.reserve(conv_len);
    for (std::size_t t = 0; t < conv_len; ++t) {
        Tensor xt = reshape(slice(window, 0, t, w), {1, w * C});
        conv_rows.push_back(relu(add(matmul(xt, p.at("conv_w")), p.at("conv_b"))));
    }
    Tensor conv_out = conv_rows.size() == 1 ? conv_rows[0] : concat(conv_rows, 0);  // [conv_len, F]
    conv_out = ctx_dropout(conv_out, ctx);
    if (ctx.capture) (*ctx.capture)["lstnet_conv"] = conv_out.values();

    // recurrent pass over every conv step
    const GruWeights main_w = gru_weights(p, "gru_");
    Tensor h_main = Tensor::zeros({1, H});
    for (std::size_t t = 0; t < conv_len; ++t) {
        h_main = gru_cell(slice(conv_out, 0, t, 1), h_main, main_w);
    }

    // skip pass: one recurrence per phase over steps p apart, capturing
    // periodic structure; an empty phase keeps its zero initial state
    const GruWeights skip_w = gru_weights(p, "skip_");
    std::vector<Tensor> pieces{h_main};
    for (std::size_t r = 0; r < sp; ++r) {
        Tensor h_skip = Tensor::zeros({1, H});
        for (std::size_t t = r; t < conv_len; t += sp) {
            h_skip = gru_cell(slice(conv_out, 0, t, 1), h_skip, skip_w);
        }
        pieces.push_back(h_skip);
    }
    Tensor combined = ctx_dropout(concat(pieces, 1), ctx);  // [1, H + sp*H]
    Tensor dense_out = add(matmul(combined, p.at("dense_w")), p.at("dense_b"));

    // autoregressive path over the last q target-channel values
    Tensor ar_vals = reshape(slice(slice(window, 0, L - q, q), 1, p.target_channel, 1), {1, q});
    Tensor ar_out = add(matmul(ar_vals, p.at("ar_w")), p.at("ar_b"));
    return reshape(add(dense_out, ar_out), {1});
}

Tensor vanilla_forward(const ModelParams& p, const Tensor& window, const FwdContext& ctx) {
    check_window(p, window, "vanilla_forward");
    Tensor x = linear(window, p.at("in_w"), p.at("in_b"));
    x = add(x, sinusoidal_encoding(p.seq_len, p.hyper.d_model));
    x = encoder_stack(p, x, nullptr, ctx, "vanilla");
    Tensor last = slice(x, 0, p.seq_len - 1, 1);
    return reshape(add(matmul(last, p.at("out_w")), p.at("out_b")), {1});
}

Tensor tst_forward(const ModelParams& p, const Tensor& window, const FwdContext& ctx) {
    check_window(p, window, "tst_forward");
    Tensor x = linear(window, p.at("embed_w"), p.at("embed_b"));  // per-step embedding
    x = add(x, sinusoidal_encoding(p.seq_len, p.hyper.d_model));
    const std::vector<unsigned char> mask = causal_mask(p.seq_len);
    x = encoder_stack(p, x, &mask, ctx, "tst");
    Tensor last = slice(x, 0, p.seq_len - 1, 1);
    return reshape(add(matmul(last, p.at("proj_w")), p.at("proj_b")), {1});
}

Tensor model_forward(const ModelParams& p, const Tensor& window, const FwdContext& ctx) {
    switch (p.kind) {
        case ModelKind::DLinear: return dlinear_forward(p, window, ctx);
        case ModelKind::LSTNet: return lstnet_forward(p, window, ctx);
        case ModelKind::VanillaTransformer: return vanilla_forward(p, window, ctx);
        case ModelKind::TST: return tst_forward(p, window, ctx);
    }
    throw std::logic_error("unreachable model kind");
}

// ---- initialization ---------------------------------------------------------

namespace {

struct Builder {
    ModelParams p;
    core::Rng rng;

    Builder(ModelKind kind, std::size_t seq_len, std::size_t n_features, std::uint64_t seed,
            ModelHyper hyper)
        : rng(seed) {
        p.kind = kind;
        p.seq_len = seq_len;
        p.n_features = n_features;
        p.hyper = hyper;
    }

    void weight(const std::string& name, Shape shape, std::size_t fan_in, std::size_t fan_out) {
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Tensor t = Tensor::zeros(std::move(shape), true);
        for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-a, a);
        p.names.push_back(name);
        p.tensors.push_back(t);
    }

    void constant(const std::string& name, Shape shape, double fill) {
        p.names.push_back(name);
        p.tensors.push_back(Tensor::full(std::move(shape), fill, true));
    }

    void gru(const std::string& prefix, std::size_t in_dim, std::size_t hidden) {
        for (const char* gate : {"wz", "wr", "wh"}) weight(prefix + gate, {in_dim, hidden}, in_dim, hidden);
        for (const char* gate : {"uz", "ur", "uh"}) weight(prefix + gate, {hidden, hidden}, hidden, hidden);
        for (const char* gate : {"bz", "br", "bh"}) constant(prefix + gate, {hidden}, 0.0);
    }
};

}  // namespace

ModelParams init_params(ModelKind kind, std::size_t seq_len, std::size_t n_features,
                        std::uint64_t seed, ModelHyper hyper) {
    if (seq_len == 0 || n_features == 0) {
        throw std::invalid_argument("model needs seq_len >= 1 and n_features >= 1");
    }
    Builder b(kind, seq_len, n_features, seed, hyper);
    const std::size_t L = seq_len, C = n_features;

    switch (kind) {
        case ModelKind::DLinear: {
            if (hyper.decomp_kernel % 2 == 0 || hyper.decomp_kernel == 0) {
                throw std::invalid_argument("decomposition kernel must be odd, got " +
                                            std::to_string(hyper.decomp_kernel));
            }
            b.p.hyper.decomp_kernel = std::min(hyper.decomp_kernel, 2 * L - 1);
            b.weight("trend_w", {C, L}, L, 1);
            b.weight("season_w", {C, L}, L, 1);
            b.constant("channel_b", {C}, 0.0);
            b.weight("agg_w", {C, 1}, C, 1);
            b.constant("agg_b", {1}, 0.0);
            break;
        }
        case ModelKind::LSTNet: {
            const std::size_t w = hyper.conv_width, F = hyper.conv_filters, H = hyper.rnn_hidden;
            if (w == 0 || w > L) {
                throw std::invalid_argument("conv width " + std::to_string(w) +
                                            " must lie in [1, seq_len=" + std::to_string(L) + "]");
            }
            if (hyper.skip == 0 || hyper.skip >= L) {
                throw std::invalid_argument("skip interval " + std::to_string(hyper.skip) +
                                            " must lie in [1, seq_len)" );
            }
            if (F == 0 || H == 0) throw std::invalid_argument("conv filters and hidden size must be >= 1");
            if (hyper.ar_window == 0) throw std::invalid_argument("AR window must be >= 1");
            b.p.hyper.ar_window = std::min(hyper.ar_window, L);
            b.weight("conv_w", {w * C, F}, w * C, F);
            b.constant("conv_b", {F}, 0.0);
            b.gru("gru_", F, H);
            b.gru("skip_", F, H);
            b.weight("dense_w", {H + hyper.skip * H, 1}, H + hyper.skip * H, 1);
            b.constant("dense_b", {1}, 0.0);
            b.weight("ar_w", {b.p.hyper.ar_window, 1}, b.p.hyper.ar_window, 1);
            b.constant("ar_b", {1}, 0.0);
            break;
        }
        case ModelKind::VanillaTransformer:
        case ModelKind::TST: {
            const std::size_t d = hyper.d_model;
            if (d == 0 || d % 2 != 0) {
                throw std::invalid_argument("d_model must be even and positive, got " + std::to_string(d));
            }
            if (hyper.n_heads == 0 || d % hyper.n_heads != 0) {
                throw std::invalid_argument("d_model " + std::to_string(d) +
                                            " is not divisible by n_heads " + std::to_string(hyper.n_heads));
            }
            if (hyper.n_layers == 0 || hyper.d_ff == 0) {
                throw std::invalid_argument("transformer needs n_layers >= 1 and d_ff >= 1");
            }
            const bool vanilla = kind == ModelKind::VanillaTransformer;
            b.weight(vanilla ? "in_w" : "embed_w", {C, d}, C, d);
            b.constant(vanilla ? "in_b" : "embed_b", {d}, 0.0);
            for (std::size_t i = 0; i < hyper.n_layers; ++i) {
                const std::string pre = "layer" + std::to_string(i) + "_";
                for (const char* w : {"wq", "wk", "wv", "wo"}) {
                    b.weight(pre + w, {d, d}, d, d);
                    b.constant(pre + "b" + std::string(1, w[1]), {d}, 0.0);
                }
                b.constant(pre + "ln1_g", {d}, 1.0);
                b.constant(pre + "ln1_b", {d}, 0.0);
                b.weight(pre + "w1", {d, hyper.d_ff}, d, hyper.d_ff);
                b.constant(pre + "b1", {hyper.d_ff}, 0.0);
                b.weight(pre + "w2", {hyper.d_ff, d}, hyper.d_ff, d);
                b.constant(pre + "b2", {d}, 0.0);
                b.constant(pre + "ln2_g", {d}, 1.0);
                b.constant(pre + "ln2_b", {d}, 0.0);
            }
            b.weight(vanilla ? "out_w" : "proj_w", {d, 1}, d, 1);
            b.constant(vanilla ? "out_b" : "proj_b", {1}, 0.0);
            break;
        }
    }
    return std::move(b.p);
}

// ---- checkpoints --------------------------------------------------------------

std::string params_to_json(const ModelParams& p) {
    nlohmann::json j;
    j["format"] = 1;
    j["kind"] = kind_name(p.kind);
    j["seq_len"] = p.seq_len;
    j["n_features"] = p.n_features;
    j["target_channel"] = p.target_channel;
    j["hyper"] = {
        {"d_model", p.hyper.d_model},       {"n_heads", p.hyper.n_heads},
        {"n_layers", p.hyper.n_layers},     {"d_ff", p.hyper.d_ff},
        {"conv_filters", p.hyper.conv_filters}, {"conv_width", p.hyper.conv_width},
        {"rnn_hidden", p.hyper.rnn_hidden}, {"skip", p.hyper.skip},
        {"ar_window", p.hyper.ar_window},   {"decomp_kernel", p.hyper.decomp_kernel},
    };
    auto tensors = nlohmann::json::array();
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        tensors.push_back({{"name", p.names[i]},
                           {"shape", p.tensors[i].shape()},
                           {"data", p.tensors[i].values()}});
    }
    j["tensors"] = std::move(tensors);
    return j.dump(1);
}

ModelParams params_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", 0) != 1) {
        throw std::runtime_error("unsupported checkpoint format " + std::to_string(j.value("format", 0)));
    }
    ModelParams p;
    p.kind = parse_kind(j.at("kind").get<std::string>());
    p.seq_len = j.at("seq_len").get<std::size_t>();
    p.n_features = j.at("n_features").get<std::size_t>();
    p.target_channel = j.at("target_channel").get<std::size_t>();
    const auto& hy = j.at("hyper");
    p.hyper.d_model = hy.at("d_model").get<std::size_t>();
    p.hyper.n_heads = hy.at("n_heads").get<std::size_t>();
    p.hyper.n_layers = hy.at("n_layers").get<std::size_t>();
    p.hyper.d_ff = hy.at("d_ff").get<std::size_t>();
    p.hyper.conv_filters = hy.at("conv_filters").get<std::size_t>();
    p.hyper.conv_width = hy.at("conv_width").get<std::size_t>();
    p.hyper.rnn_hidden = hy.at("rnn_hidden").get<std::size_t>();
    p.hyper.skip = hy.at("skip").get<std::size_t>();
    p.hyper.ar_window = hy.at("ar_window").get<std::size_t>();
    p.hyper.decomp_kernel = hy.at("decomp_kernel").get<std::size_t>();
    for (const auto& t : j.at("tensors")) {
        Shape shape = t.at("shape").get<Shape>();
        std::vector<double> data = t.at("data").get<std::vector<double>>();
        if (data.size() != shape_size(shape)) {
            throw std::runtime_error("malformed checkpoint: tensor '" +
                                     t.at("name").get<std::string>() + "' data does not match its shape");
        }
        p.names.push_back(t.at("name").get<std::string>());
        p.tensors.push_back(Tensor::from_values(std::move(shape), std::move(data), true));
    }
    return p;
}

void save_params(const ModelParams& p, const std::string& path) {
    core::write_text_file(path, params_to_json(p));
}

ModelParams load_params(const std::string& path) {
    return params_from_json(core::read_text_file(path));
}

}  // namespace seqcast
