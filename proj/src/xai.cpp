#include "seqcast/xai.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "seqcast/core/linalg.hpp"
#include "seqcast/core/rng.hpp"
#include "seqcast/kernels.hpp"

namespace seqcast {

namespace {

std::vector<std::string> default_names(std::size_t m) {
    std::vector<std::string> names;
    names.reserve(m);
    for (std::size_t i = 0; i < m; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

std::vector<std::string> resolve_names(const std::vector<std::string>& names, std::size_t m) {
    if (names.empty()) return default_names(m);
    if (names.size() != m) {
        throw std::invalid_argument("got " + std::to_string(names.size()) + " feature names for " +
                                    std::to_string(m) + " features");
    }
    return names;
}

void check_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + what);
    }
}

double finite_eval(const ModelFn& fn, const std::vector<double>& z, const char* what) {
    const double v = fn(z);
    if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + what);
    return v;
}

}  // namespace

std::string method_name(AttributionMethod method) {
    switch (method) {
        case AttributionMethod::ExactShapley: return "exact_shapley";
        case AttributionMethod::KernelShap: return "kernel_shap";
        case AttributionMethod::Lime: return "lime";
    }
    return "?";
}

AttributionMethod parse_method(const std::string& name) {
    if (name == "exact_shapley" || name == "exact") return AttributionMethod::ExactShapley;
    if (name == "kernel_shap" || name == "shap") return AttributionMethod::KernelShap;
    if (name == "lime") return AttributionMethod::Lime;
    throw std::invalid_argument("unknown attribution method '" + name +
                                "' (expected exact_shapley, kernel_shap/shap, or lime)");
}

double Attribution::score_of(const std::string& name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        if (feature_names[i] == name) return scores[i];
    }
    throw std::invalid_argument("attribution has no feature '" + name + "'");
}

// ---- flattened window layout ---------------------------------------------------

std::vector<std::string> flat_feature_names(const std::vector<std::string>& columns,
                                            std::size_t seq_len) {
    std::vector<std::string> names;
    names.reserve(columns.size() * seq_len);
    for (const auto& column : columns) {
        for (std::size_t k = 0; k < seq_len; ++k) {
            names.push_back(column + "_t" + std::to_string(seq_len - k));
        }
    }
    return names;
}

std::vector<double> flatten_window(const std::vector<double>& window, std::size_t seq_len,
                                   std::size_t n_features) {
    if (window.size() != seq_len * n_features) {
        throw std::invalid_argument("window has " + std::to_string(window.size()) +
                                    " values, expected " + std::to_string(seq_len * n_features));
    }
    std::vector<double> flat(window.size());
    for (std::size_t c = 0; c < n_features; ++c) {
        for (std::size_t k = 0; k < seq_len; ++k) flat[c * seq_len + k] = window[k * n_features + c];
    }
    return flat;
}

std::vector<double> unflatten_window(const std::vector<double>& flat, std::size_t seq_len,
                                     std::size_t n_features) {
    if (flat.size() != seq_len * n_features) {
        throw std::invalid_argument("flat vector has " + std::to_string(flat.size()) +
                                    " values, expected " + std::to_string(seq_len * n_features));
    }
    std::vector<double> window(flat.size());
    for (std::size_t c = 0; c < n_features; ++c) {
        for (std::size_t k = 0; k < seq_len; ++k) window[k * n_features + c] = flat[c * seq_len + k];
    }
    return window;
}

// ---- exact Shapley ---------------------------------------------------------------

Attribution exact_shapley(const ModelFn& model_fn, const std::vector<double>& x,
                          const std::vector<double>& background,
                          const std::vector<std::string>& names) {
    const std::size_t m = x.size();
    if (m == 0) throw std::invalid_argument("exact_shapley needs at least one feature");
    if (background.size() != m) {
        throw std::invalid_argument("background size " + std::to_string(background.size()) +
                                    " does not match " + std::to_string(m) + " features");
    }
    if (m > 20) {
        throw std::invalid_argument("exact Shapley enumeration is limited to 20 features, got " +
                                    std::to_string(m));
    }

    const std::size_t n_masks = std::size_t{1} << m;
    std::vector<double> vals(n_masks);
    kernels::parallel_for(n_masks, [&](std::size_t mask) {
        std::vector<double> z = background;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask & (std::size_t{1} << i)) z[i] = x[i];
        }
        vals[mask] = model_fn(z);
    });
    check_finite(vals, "model output in exact_shapley");

    // factorials up to 20! are exactly representable in a double
    std::vector<double> fact(m + 1, 1.0);
    for (std::size_t i = 1; i <= m; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    std::vector<double> weight(m);  // weight by |S| for S excluding the feature
    for (std::size_t s = 0; s < m; ++s) weight[s] = fact[s] * fact[m - s - 1] / fact[m];

    std::vector<double> phi(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
            phi[i] += weight[s] * (vals[mask | bit] - vals[mask]);
        }
    }

    Attribution a;
    a.method = AttributionMethod::ExactShapley;
    a.feature_names = resolve_names(names, m);
    a.scores = std::move(phi);
    a.base_value = vals[0];
    a.prediction = vals[n_masks - 1];
    a.n_samples = n_masks;
    a.solver_residual = 0.0;
    return a;
}

// ---- KernelSHAP ------------------------------------------------------------------

Attribution kernel_shap(const ModelFn& model_fn, const std::vector<double>& x,
                        const std::vector<double>& background, std::size_t n_samples,
                        std::uint64_t seed, const std::vector<std::string>& names) {
    const std::size_t m = x.size();
    if (m == 0) throw std::invalid_argument("kernel_shap needs at least one feature");
    if (background.size() != m) {
        throw std::invalid_argument("background size " + std::to_string(background.size()) +
                                    " does not match " + std::to_string(m) + " features");
    }
    if (n_samples < m + 2) {
        throw std::invalid_argument("kernel_shap needs n_samples >= M + 2 = " +
                                    std::to_string(m + 2) + ", got " + std::to_string(n_samples));
    }

    const double v0 = finite_eval(model_fn, background, "model output at the all-off coalition");
    const double v1 = finite_eval(model_fn, x, "model output at the all-on coalition");
    const double delta = v1 - v0;

    Attribution a;
    a.method = AttributionMethod::KernelShap;
    a.feature_names = resolve_names(names, m);
    a.base_value = v0;
    a.prediction = v1;

    if (m == 1) {  // the constraints alone pin the single score
        a.scores = {delta};
        a.n_samples = 2;
        return a;
    }

    // interior coalitions: full enumeration when the budget covers all of
    // them, else coalition sizes sampled with the kernel's per-size mass
    const std::size_t budget = n_samples - 2;
    const bool full = m < 63 && budget >= (std::size_t{1} << m) - 2;

    std::vector<unsigned char> zs;     // n_rows * m membership flags
    std::vector<double> row_weights;   // Shapley kernel weight (full) or 1 (sampled)
    std::size_t n_rows = 0;

    if (full) {
        n_rows = (std::size_t{1} << m) - 2;
        zs.resize(n_rows * m);
        row_weights.resize(n_rows);
        std::vector<double> fact(m + 1, 1.0);
        for (std::size_t i = 1; i <= m; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
        for (std::size_t mask = 1, r = 0; mask < (std::size_t{1} << m) - 1; ++mask, ++r) {
            const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
            for (std::size_t i = 0; i < m; ++i) zs[r * m + i] = (mask >> i) & 1u;
            const double binom = fact[m] / (fact[s] * fact[m - s]);
            row_weights[r] = static_cast<double>(m - 1) /
                             (binom * static_cast<double>(s) * static_cast<double>(m - s));
        }
    } else {
        n_rows = budget;
        zs.resize(n_rows * m);
        row_weights.assign(n_rows, 1.0);
        // per-size kernel mass: sum over size-s coalitions of pi(z) is
        // proportional to 1/(s*(m-s))
        std::vector<double> cdf(m - 1);
        double total = 0.0;
        for (std::size_t s = 1; s <= m - 1; ++s) {
            total += 1.0 / (static_cast<double>(s) * static_cast<double>(m - s));
            cdf[s - 1] = total;
        }
        core::Rng rng(seed);
        std::vector<std::size_t> idx(m);
        for (std::size_t r = 0; r < n_rows; ++r) {
            const double u = rng.uniform01() * total;
            std::size_t s = 1;
            while (s < m - 1 && u > cdf[s - 1]) ++s;
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::size_t j = 0; j < s; ++j) {
                std::swap(idx[j], idx[j + rng.bounded(static_cast<std::uint64_t>(m - j))]);
            }
            for (std::size_t j = 0; j < s; ++j) zs[r * m + idx[j]] = 1;
        }
    }

    std::vector<double> vals(n_rows);
    kernels::parallel_for(n_rows, [&](std::size_t r) {
        std::vector<double> z = background;
        for (std::size_t i = 0; i < m; ++i) {
            if (zs[r * m + i]) z[i] = x[i];
        }
        vals[r] = model_fn(z);
    });
    check_finite(vals, "model output in kernel_shap");

    // Eliminate the last score via the efficiency constraint
    // sum(phi) = delta, then solve the weighted least squares on the rest.
    const std::size_t cols = m - 1;
    std::vector<double> design(n_rows * cols);
    std::vector<double> target(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const double z_last = zs[r * m + (m - 1)];
        for (std::size_t i = 0; i < cols; ++i) {
            design[r * cols + i] = static_cast<double>(zs[r * m + i]) - z_last;
        }
        target[r] = vals[r] - v0 - z_last * delta;
    }

    std::vector<double> beta;
    if (!core::weighted_least_squares(design, target, row_weights, n_rows, cols, beta)) {
        const std::size_t rank = core::matrix_rank(design, n_rows, cols);
        throw std::runtime_error("singular kernel SHAP system: rank " + std::to_string(rank) +
                                 " of " + std::to_string(cols) + " unknowns; draw more samples");
    }

    double residual = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        double fit = 0.0;
        for (std::size_t i = 0; i < cols; ++i) fit += design[r * cols + i] * beta[i];
        const double e = fit - target[r];
        residual += row_weights[r] * e * e;
    }

    std::vector<double> phi(m, 0.0);
    double partial = 0.0;
    for (std::size_t i = 0; i < cols; ++i) {
        phi[i] = beta[i];
        partial += beta[i];
    }
    phi[m - 1] = delta - partial;

    a.scores = std::move(phi);
    a.n_samples = n_rows + 2;
    a.solver_residual = std::sqrt(residual);
    return a;
}

// ---- LIME ------------------------------------------------------------------------

Attribution lime_explain(const ModelFn& model_fn, const std::vector<double>& x,
                         const std::vector<double>& means, const std::vector<double>& stds,
                         const LimeConfig& config, const std::vector<std::string>& names) {
    const std::size_t m = x.size();
    if (m == 0) throw std::invalid_argument("lime_explain needs at least one feature");
    if (means.size() != m || stds.size() != m) {
        throw std::invalid_argument("training stats do not cover all " + std::to_string(m) +
                                    " features");
    }
    if (config.n_perturb == 0) throw std::invalid_argument("LIME needs n_perturb >= 1");
    const std::vector<std::string> all_names = resolve_names(names, m);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < m; ++i) {
        if (stds[i] < 0.0) throw std::invalid_argument("negative std for feature " + all_names[i]);
        if (stds[i] > 0.0) active.push_back(i);
    }
    if (active.empty()) {
        throw std::invalid_argument("LIME needs at least one feature with positive std");
    }
    const std::size_t n_active = active.size();
    const std::size_t n = config.n_perturb;
    const double width =
        config.kernel_width > 0.0 ? config.kernel_width : 0.75 * std::sqrt(static_cast<double>(m));

    // standardized draws first (seed-defined order), then perturbed rows
    core::Rng rng(config.seed);
    std::vector<double> eps(n * n_active);
    for (double& e : eps) e = rng.normal();

    std::vector<double> rows(n * m);
    std::vector<double> weights(n);
    for (std::size_t r = 0; r < n; ++r) {
        double d2 = 0.0;
        std::copy(x.begin(), x.end(), rows.begin() + static_cast<std::ptrdiff_t>(r * m));
        for (std::size_t j = 0; j < n_active; ++j) {
            const double e = eps[r * n_active + j];
            rows[r * m + active[j]] = x[active[j]] + e * stds[active[j]];
            d2 += e * e;
        }
        weights[r] = std::exp(-d2 / (width * width));
    }
    if (*std::max_element(weights.begin(), weights.end()) < 1e-12) {
        throw std::runtime_error("all LIME sample weights fall below 1e-12: kernel width " +
                                 std::to_string(width) + " is too small for this neighborhood");
    }

    std::vector<double> fz(n);
    kernels::parallel_for(n, [&](std::size_t r) {
        std::vector<double> z(rows.begin() + static_cast<std::ptrdiff_t>(r * m),
                              rows.begin() + static_cast<std::ptrdiff_t>((r + 1) * m));
        fz[r] = model_fn(z);
    });
    check_finite(fz, "model output in lime_explain");

    // full weighted ridge fit over every active feature plus an intercept
    const std::size_t cols = n_active + 1;
    std::vector<double> design(n * cols);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < n_active; ++j) design[r * cols + j] = rows[r * m + active[j]];
        design[r * cols + n_active] = 1.0;
    }
    std::vector<double> beta;
    if (!core::weighted_least_squares(design, fz, weights, n, cols, beta, config.ridge, false)) {
        throw std::runtime_error("singular LIME system: rank " +
                                 std::to_string(core::matrix_rank(design, n, cols)) + " of " +
                                 std::to_string(cols));
    }

    // keep the top_k coefficients by magnitude, then refit on the subset
    const std::size_t k = std::min(config.top_k == 0 ? n_active : config.top_k, n_active);
    std::vector<std::size_t> order(n_active);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double fa = std::fabs(beta[a]), fb = std::fabs(beta[b]);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    std::vector<std::size_t> kept(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

    const std::size_t cols2 = k + 1;
    std::vector<double> design2(n * cols2);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < k; ++j) design2[r * cols2 + j] = rows[r * m + active[kept[j]]];
        design2[r * cols2 + k] = 1.0;
    }
    std::vector<double> beta2;
    if (!core::weighted_least_squares(design2, fz, weights, n, cols2, beta2, config.ridge, false)) {
        throw std::runtime_error("singular LIME refit: rank " +
                                 std::to_string(core::matrix_rank(design2, n, cols2)) + " of " +
                                 std::to_string(cols2));
    }

    double residual = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double fit = 0.0;
        for (std::size_t j = 0; j < cols2; ++j) fit += design2[r * cols2 + j] * beta2[j];
        const double e = fit - fz[r];
        residual += weights[r] * e * e;
    }

    // report in descending coefficient magnitude (original index on ties)
    std::vector<std::size_t> out_order(k);
    std::iota(out_order.begin(), out_order.end(), std::size_t{0});
    std::sort(out_order.begin(), out_order.end(), [&](std::size_t a, std::size_t b) {
        const double fa = std::fabs(beta2[a]), fb = std::fabs(beta2[b]);
        if (fa != fb) return fa > fb;
        return kept[a] < kept[b];
    });

    Attribution a;
    a.method = AttributionMethod::Lime;
    for (std::size_t j : out_order) {
        a.feature_names.push_back(all_names[active[kept[j]]]);
        a.scores.push_back(beta2[j]);
    }
    a.base_value = beta2[k];
    a.prediction = finite_eval(model_fn, x, "model output at the explained instance");
    a.n_samples = n + 1;
    a.solver_residual = std::sqrt(residual);
    return a;
}

// ---- window-level drivers ---------------------------------------------------------

ModelFn window_model_fn(const TrainedModel& model) {
    const ModelParams params = model.params;  // tensor handles share storage
    const std::uint64_t seed = model.config.seed;
    return [params, seed](const std::vector<double>& flat) {
        FwdContext ctx;
        ctx.train = false;
        ctx.seed = seed;
        Tensor window = Tensor::from_values({params.seq_len, params.n_features},
                                            unflatten_window(flat, params.seq_len, params.n_features),
                                            false);
        return model_forward(params, window, ctx).values()[0];
    };
}

Attribution explain_final_instance(const TrainedModel& model, const WindowedDataset& dataset,
                                   const WindowedDataset& train_windows, AttributionMethod method,
                                   const ExplainOptions& options) {
    if (dataset.samples.empty()) throw std::invalid_argument("cannot explain an empty dataset");
    if (train_windows.samples.empty()) {
        throw std::invalid_argument("explain_final_instance needs training windows for statistics");
    }
    const std::size_t seq_len = model.params.seq_len;
    const std::size_t n_features = model.params.n_features;
    if (dataset.seq_len != seq_len || dataset.n_features() != n_features ||
        train_windows.seq_len != seq_len || train_windows.n_features() != n_features) {
        throw std::invalid_argument("datasets do not match the trained model's window shape");
    }

    std::size_t last = 0;
    for (std::size_t i = 1; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].target_date > dataset.samples[last].target_date) last = i;
    }
    const std::vector<double> flat_x =
        flatten_window(dataset.samples[last].inputs, seq_len, n_features);
    const std::vector<std::string> names = flat_feature_names(dataset.feature_names, seq_len);
    const std::size_t m = flat_x.size();
    const ModelFn fn = window_model_fn(model);

    // per-feature statistics over the training windows, in flat layout
    const double inv_n = 1.0 / static_cast<double>(train_windows.samples.size());
    std::vector<double> mean(m, 0.0), sq(m, 0.0);
    for (const WindowSample& s : train_windows.samples) {
        const std::vector<double> flat = flatten_window(s.inputs, seq_len, n_features);
        for (std::size_t j = 0; j < m; ++j) {
            mean[j] += flat[j];
            sq[j] += flat[j] * flat[j];
        }
    }
    std::vector<double> stds(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        mean[j] *= inv_n;
        const double var = std::max(0.0, sq[j] * inv_n - mean[j] * mean[j]);
        stds[j] = std::sqrt(var);
    }

    switch (method) {
        case AttributionMethod::ExactShapley:
            return exact_shapley(fn, flat_x, mean, names);
        case AttributionMethod::KernelShap: {
            const std::size_t n_samples =
                options.shap_samples != 0 ? options.shap_samples : 2 * m + 2048;
            return kernel_shap(fn, flat_x, mean, n_samples, options.seed, names);
        }
        case AttributionMethod::Lime: {
            LimeConfig cfg = options.lime;
            cfg.seed = options.seed;
            return lime_explain(fn, flat_x, mean, stds, cfg, names);
        }
    }
    throw std::logic_error("unreachable attribution method");
}

GlobalSummary global_shap_summary(const std::vector<Attribution>& attributions) {
    if (attributions.empty()) {
        throw std::invalid_argument("global_shap_summary needs at least one attribution");
    }
    const std::vector<std::string>& universe = attributions[0].feature_names;
    std::vector<std::string> sorted_universe = universe;
    std::sort(sorted_universe.begin(), sorted_universe.end());

    std::vector<double> acc(universe.size(), 0.0);
    for (const Attribution& a : attributions) {
        std::vector<std::string> sorted_names = a.feature_names;
        std::sort(sorted_names.begin(), sorted_names.end());
        if (sorted_names != sorted_universe) {
            throw std::invalid_argument("attributions do not share one feature universe");
        }
        for (std::size_t i = 0; i < universe.size(); ++i) acc[i] += std::fabs(a.score_of(universe[i]));
    }
    const double inv = 1.0 / static_cast<double>(attributions.size());
    for (double& v : acc) v *= inv;

    std::vector<std::size_t> order(universe.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (acc[a] != acc[b]) return acc[a] > acc[b];
        return universe[a] < universe[b];
    });

    GlobalSummary summary;
    summary.feature_names.reserve(universe.size());
    summary.mean_abs_scores.reserve(universe.size());
    for (std::size_t i : order) {
        summary.feature_names.push_back(universe[i]);
        summary.mean_abs_scores.push_back(acc[i]);
    }
    return summary;
}

}  // namespace seqcast
