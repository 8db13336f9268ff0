#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqcast/models.hpp"
#include "seqcast/xai.hpp"

namespace seqcast {

struct SymbolInput {
    std::string symbol;
    std::string csv_path;
};

/// A batch experiment: which series, which architectures, where results go,
/// and any overrides on top of each architecture's default training recipe.
/// Parsed from a JSON file; see README for the schema.
struct ExperimentConfig {
    std::vector<SymbolInput> data;
    std::vector<ModelKind> models;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    double train_fraction = 0.8;
    std::vector<std::size_t> sweep = {5, 10, 30, 60};

    // optional per-field overrides applied to every model's default recipe
    std::optional<std::size_t> epochs;
    std::optional<double> learning_rate;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> seq_len;
    std::optional<double> dropout;

    std::size_t shap_samples = 0;           // 0 selects the attribution default (2M + 2048)
    std::size_t lime_perturb = 5000;
    std::size_t shap_global_instances = 0;  // cap on explained test instances; 0 = all
};

/// Parses and validates the JSON config text; throws std::runtime_error with
/// a human-readable message on any structural or semantic problem.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Subcommand drivers. Each writes its human-readable progress/result text to
// `out` and returns the process exit code: 0 success, 1 experiment/data
// failure, 2 usage or I/O failure.

/// Prints one line per finding plus a summary; exit 0 iff no errors,
/// 2 when the file cannot be read at all.
int cmd_validate(const std::string& csv_path, std::ostream& out);

/// Parses, builds the full indicator table, writes it as CSV to out_path.
int cmd_featurize(const std::string& csv_path, const std::string& out_path, std::ostream& out);

/// The full pipeline per (symbol, model): featurize, split, scale, window,
/// train, evaluate, explain the final instance (SHAP and LIME), emit
/// artifacts under out_dir/<symbol>/<model>/ plus one run-level
/// manifest.json. A failing pair is recorded and skipped; the rest continue.
int cmd_run(const ExperimentConfig& config, bool plots, std::ostream& out);

/// Trains every (model, seq_len) combination from config.sweep per symbol
/// and writes sweep_table.csv with the per-model best row marked.
int cmd_sweep(const ExperimentConfig& config, std::ostream& out);

/// Trains one (first symbol, chosen model) pair and emits/echoes the local
/// explanation for the chronologically last test instance.
int cmd_explain(const ExperimentConfig& config, ModelKind kind, AttributionMethod method,
                std::ostream& out);

}  // namespace seqcast
