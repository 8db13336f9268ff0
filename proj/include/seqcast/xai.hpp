#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqcast/trainer.hpp"

namespace seqcast {

/// A black-box scalar model over a flat feature vector. Must be pure
/// (deterministic, no observable state) and safe to call from several
/// threads at once on distinct inputs.
using ModelFn = std::function<double(const std::vector<double>&)>;

enum class AttributionMethod { ExactShapley, KernelShap, Lime };

std::string method_name(AttributionMethod method);
AttributionMethod parse_method(const std::string& name);  // throws on unknown names

// ---- flattened window layout -------------------------------------------------
//
// Windows are explained as flat vectors: column-major over features, lag
// descending within each column (lag 1 = most recent row). With columns
// [close, RSI_14] and L = 2 the layout is
// [close_t2, close_t1, RSI_14_t2, RSI_14_t1].

std::vector<std::string> flat_feature_names(const std::vector<std::string>& columns,
                                            std::size_t seq_len);

/// Row-major L x C window -> flat vector of length L*C in the layout above.
std::vector<double> flatten_window(const std::vector<double>& window, std::size_t seq_len,
                                   std::size_t n_features);

/// Exact inverse of flatten_window (bitwise).
std::vector<double> unflatten_window(const std::vector<double>& flat, std::size_t seq_len,
                                     std::size_t n_features);

// ---- attribution results -------------------------------------------------------

/// Per-feature scores plus the bookkeeping needed to check the efficiency
/// property. For the Shapley methods, names covers every feature and
/// base_value + sum(scores) = prediction within solver precision; for LIME,
/// names is restricted to the top_k selected features and base_value is the
/// local surrogate's intercept.
struct Attribution {
    AttributionMethod method = AttributionMethod::ExactShapley;
    std::vector<std::string> feature_names;
    std::vector<double> scores;  // parallel to feature_names
    double base_value = 0.0;
    double prediction = 0.0;
    // diagnostics
    std::size_t n_samples = 0;       // model evaluations spent
    double solver_residual = 0.0;    // weighted residual norm of the final fit

    double score_of(const std::string& name) const;  // throws when absent
};

/// Shapley values by full coalition enumeration (2^M model calls, M <= 20).
/// v(S) evaluates the model with instance values on S and background values
/// elsewhere; base_value = v(empty set).
Attribution exact_shapley(const ModelFn& model_fn, const std::vector<double>& x,
                          const std::vector<double>& background,
                          const std::vector<std::string>& names = {});

/// KernelSHAP: coalitions weighted by the Shapley kernel
/// pi(z) = (M-1)/(binom(M,|z|)*|z|*(M-|z|)), the all-on and all-off
/// coalitions imposed as equality constraints (so efficiency holds by
/// construction). Enumerates every interior coalition whenever the budget
/// n_samples - 2 covers all 2^M - 2 of them; otherwise samples coalition
/// sizes proportionally to the kernel mass. Needs n_samples >= M + 2.
Attribution kernel_shap(const ModelFn& model_fn, const std::vector<double>& x,
                        const std::vector<double>& background, std::size_t n_samples,
                        std::uint64_t seed, const std::vector<std::string>& names = {});

struct LimeConfig {
    std::size_t n_perturb = 5000;
    double kernel_width = 0.0;  // <= 0 selects the default 0.75 * sqrt(M)
    std::size_t top_k = 10;
    double ridge = 1e-3;  // intercept never penalized
    std::uint64_t seed = 42;
};

/// LIME: perturbs x with Normal(x, diag(std^2)) draws, weights neighbors by
/// exp(-d^2/width^2) with d the Euclidean distance in standardized units,
/// fits a weighted ridge surrogate over all perturbable features, keeps the
/// top_k coefficients by magnitude, and refits on that subset. Features with
/// zero std are held fixed and excluded from the surrogate.
Attribution lime_explain(const ModelFn& model_fn, const std::vector<double>& x,
                         const std::vector<double>& means, const std::vector<double>& stds,
                         const LimeConfig& config, const std::vector<std::string>& names = {});

// ---- window-level drivers ------------------------------------------------------

struct ExplainOptions {
    std::size_t shap_samples = 0;  // 0 selects 2*M + 2048
    LimeConfig lime;
    std::uint64_t seed = 42;  // overrides the per-method seeds
};

/// Explains the chronologically last sample of `dataset` (normally the test
/// split) against the trained model's normalized output. The SHAP background
/// is the per-feature mean over the training windows; LIME perturbation
/// statistics also come from the training windows. Scores are in
/// normalized-target units.
Attribution explain_final_instance(const TrainedModel& model, const WindowedDataset& dataset,
                                   const WindowedDataset& train_windows, AttributionMethod method,
                                   const ExplainOptions& options = {});

/// Builds the per-window model function used by explain_final_instance:
/// unflattens, runs an eval-mode forward, returns the normalized forecast.
ModelFn window_model_fn(const TrainedModel& model);

struct GlobalSummary {
    std::vector<std::string> feature_names;  // descending mean |score|, ties lexicographic
    std::vector<double> mean_abs_scores;     // parallel to feature_names
};

/// Mean absolute score per feature across attributions that share one
/// feature universe (set equality enforced), ranked descending.
GlobalSummary global_shap_summary(const std::vector<Attribution>& attributions);

}  // namespace seqcast
