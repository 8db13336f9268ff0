#include "seqcast/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "seqcast/core/csv.hpp"
#include "seqcast/core/rng.hpp"
#include "seqcast/market_data.hpp"
#include "seqcast/metrics.hpp"
#include "seqcast/report.hpp"
#include "seqcast/version.hpp"

namespace seqcast {

namespace fs = std::filesystem;

// ---- configuration ---------------------------------------------------------------

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config root must be a JSON object");

    ExperimentConfig cfg;
    try {
        if (!j.contains("data") || !j.at("data").is_array() || j.at("data").empty()) {
            throw std::runtime_error("config needs a non-empty 'data' array");
        }
        for (const auto& entry : j.at("data")) {
            SymbolInput input;
            input.symbol = entry.at("symbol").get<std::string>();
            input.csv_path = entry.at("csv").get<std::string>();
            if (input.symbol.empty()) throw std::runtime_error("empty symbol in 'data'");
            cfg.data.push_back(std::move(input));
        }
        if (!j.contains("models") || !j.at("models").is_array() || j.at("models").empty()) {
            throw std::runtime_error("config needs a non-empty 'models' array");
        }
        for (const auto& name : j.at("models")) cfg.models.push_back(parse_kind(name.get<std::string>()));

        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
        if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
            throw std::runtime_error("train_fraction must lie strictly between 0 and 1");
        }
        if (j.contains("sweep")) {
            cfg.sweep = j.at("sweep").get<std::vector<std::size_t>>();
            if (cfg.sweep.empty()) throw std::runtime_error("'sweep' must not be empty when given");
            for (std::size_t v : cfg.sweep) {
                if (v == 0) throw std::runtime_error("sweep sequence lengths must be >= 1");
            }
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            if (t.contains("epochs")) cfg.epochs = t.at("epochs").get<std::size_t>();
            if (t.contains("learning_rate")) cfg.learning_rate = t.at("learning_rate").get<double>();
            if (t.contains("batch_size")) cfg.batch_size = t.at("batch_size").get<std::size_t>();
            if (t.contains("seq_len")) cfg.seq_len = t.at("seq_len").get<std::size_t>();
            if (t.contains("dropout")) cfg.dropout = t.at("dropout").get<double>();
        }
        cfg.shap_samples = j.value("shap_samples", cfg.shap_samples);
        cfg.lime_perturb = j.value("lime_perturb", cfg.lime_perturb);
        cfg.shap_global_instances = j.value("shap_global_instances", cfg.shap_global_instances);
    } catch (const std::runtime_error&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("malformed config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(core::read_text_file(path));
}

// ---- shared pipeline pieces --------------------------------------------------------

namespace {

struct PreparedSymbol {
    std::string symbol;
    Scaler scaler;
    FeatureTable train_norm;
    FeatureTable test_norm;
};

PreparedSymbol prepare_symbol(const SymbolInput& input, double train_fraction) {
    const OhlcvSeries series = parse_ohlcv_csv(input.csv_path, input.symbol);
    const FeatureTable features = build_feature_table(series);
    const auto [train_table, test_table] = chronological_split(features, train_fraction);
    PreparedSymbol prep;
    prep.symbol = input.symbol;
    prep.scaler = fit_minmax(train_table);
    prep.train_norm = apply_minmax(prep.scaler, train_table);
    prep.test_norm = apply_minmax(prep.scaler, test_table);
    return prep;
}

TrainConfig config_for(ModelKind kind, const ExperimentConfig& cfg) {
    TrainConfig tc = default_config(kind);
    tc.seed = cfg.seed;
    if (cfg.epochs) tc.epochs = *cfg.epochs;
    if (cfg.learning_rate) tc.learning_rate = *cfg.learning_rate;
    if (cfg.batch_size) tc.batch_size = *cfg.batch_size;
    if (cfg.seq_len) tc.seq_len = *cfg.seq_len;
    if (cfg.dropout) tc.dropout = *cfg.dropout;
    return tc;
}

struct PairOutput {
    TrainedModel model;
    WindowedDataset train_windows;
    WindowedDataset test_windows;
    std::vector<Prediction> predictions;
    MetricsReport metrics;
};

PairOutput run_pair(const PreparedSymbol& prep, ModelKind kind, const TrainConfig& tc) {
    const WindowSpec spec{tc.seq_len, 1};
    PairOutput out;
    out.train_windows = make_windows(prep.train_norm, spec);
    out.test_windows = make_windows(prep.test_norm, spec);
    out.model = train(kind, out.train_windows, out.test_windows, tc, prep.scaler);
    out.predictions = predict(out.model, out.test_windows);
    std::vector<double> y_true, y_pred;
    y_true.reserve(out.predictions.size());
    y_pred.reserve(out.predictions.size());
    for (const Prediction& p : out.predictions) {
        y_true.push_back(p.y_true);
        y_pred.push_back(p.y_pred);
    }
    out.metrics = evaluate(y_true, y_pred);
    return out;
}

core::Date final_target_date(const WindowedDataset& dataset) {
    core::Date latest = dataset.samples.front().target_date;
    for (const WindowSample& s : dataset.samples) latest = std::max(latest, s.target_date);
    return latest;
}

/// Per-instance KernelSHAP over (a cap-limited prefix of) the test windows,
/// feeding the global mean-|score| summary.
std::vector<Attribution> shap_over_dataset(const PairOutput& pair, std::size_t shap_samples,
                                           std::uint64_t seed, std::size_t cap) {
    const std::size_t seq_len = pair.model.params.seq_len;
    const std::size_t n_features = pair.model.params.n_features;
    const ModelFn fn = window_model_fn(pair.model);
    const std::vector<std::string> names =
        flat_feature_names(pair.test_windows.feature_names, seq_len);

    const std::size_t m = seq_len * n_features;
    std::vector<double> background(m, 0.0);
    for (const WindowSample& s : pair.train_windows.samples) {
        const std::vector<double> flat = flatten_window(s.inputs, seq_len, n_features);
        for (std::size_t j = 0; j < m; ++j) background[j] += flat[j];
    }
    for (double& v : background) v /= static_cast<double>(pair.train_windows.samples.size());

    const std::size_t budget = shap_samples != 0 ? shap_samples : 2 * m + 2048;
    const std::size_t count =
        cap == 0 ? pair.test_windows.samples.size() : std::min(cap, pair.test_windows.samples.size());
    std::vector<Attribution> attributions;
    attributions.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::vector<double> flat_x =
            flatten_window(pair.test_windows.samples[i].inputs, seq_len, n_features);
        attributions.push_back(
            kernel_shap(fn, flat_x, background, budget, core::derive_stream(seed, 0x65, i), names));
    }
    return attributions;
}

void write_file(const fs::path& path, const std::string& content, std::vector<std::string>& files,
                const fs::path& root) {
    core::write_text_file(path.string(), content);
    files.push_back(fs::relative(path, root).generic_string());
}

nlohmann::json config_echo(const ExperimentConfig& cfg) {
    nlohmann::json j;
    for (const auto& input : cfg.data) j["data"].push_back({{"symbol", input.symbol}, {"csv", input.csv_path}});
    for (ModelKind kind : cfg.models) j["models"].push_back(kind_name(kind));
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    j["train_fraction"] = cfg.train_fraction;
    j["sweep"] = cfg.sweep;
    nlohmann::json overrides = nlohmann::json::object();
    if (cfg.epochs) overrides["epochs"] = *cfg.epochs;
    if (cfg.learning_rate) overrides["learning_rate"] = *cfg.learning_rate;
    if (cfg.batch_size) overrides["batch_size"] = *cfg.batch_size;
    if (cfg.seq_len) overrides["seq_len"] = *cfg.seq_len;
    if (cfg.dropout) overrides["dropout"] = *cfg.dropout;
    j["train"] = overrides;
    j["shap_samples"] = cfg.shap_samples;
    j["lime_perturb"] = cfg.lime_perturb;
    j["shap_global_instances"] = cfg.shap_global_instances;
    return j;
}

int check_config(const ExperimentConfig& cfg, std::ostream& out) {
    if (cfg.data.empty() || cfg.models.empty()) {
        out << "error: config needs at least one symbol and one model\n";
        return 2;
    }
    return 0;
}

}  // namespace

// ---- subcommands --------------------------------------------------------------------

int cmd_validate(const std::string& csv_path, std::ostream& out) {
    const ParsedCsv parsed = parse_ohlcv_csv_lenient(csv_path, "input");

    std::vector<Finding> errors = parsed.report.errors;
    std::vector<Finding> warnings = parsed.report.warnings;
    bool io_failure = false;
    for (const Finding& f : errors) io_failure = io_failure || f.rule == "io";

    if (!io_failure && !parsed.series.bars.empty()) {
        const ValidationReport series_report = validate_series(parsed.series);
        for (const Finding& f : series_report.errors) {
            if (f.rule != "duplicate date") errors.push_back(f);  // already reported by the parser
        }
        for (const Finding& f : series_report.warnings) warnings.push_back(f);
    }

    for (const Finding& f : errors) out << "error [" << f.rule << "] " << f.message << "\n";
    for (const Finding& f : warnings) out << "warning [" << f.rule << "] " << f.message << "\n";
    out << errors.size() << " errors, " << warnings.size() << " warnings\n";

    if (io_failure) return 2;
    return errors.empty() ? 0 : 1;
}

int cmd_featurize(const std::string& csv_path, const std::string& out_path, std::ostream& out) {
    ParsedCsv parsed = parse_ohlcv_csv_lenient(csv_path, "input");
    for (const Finding& f : parsed.report.errors) {
        if (f.rule == "io") {
            out << "error [io] " << f.message << "\n";
            return 2;
        }
    }
    try {
        const OhlcvSeries series = parse_ohlcv_csv(csv_path, "input");
        const FeatureTable table = build_feature_table(series);
        core::write_text_file(out_path, feature_table_csv(table));
        out << "wrote " << table.n_rows() << " rows x " << (table.n_cols() + 1) << " columns to "
            << out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_run(const ExperimentConfig& cfg, bool plots, std::ostream& out) {
    if (const int rc = check_config(cfg, out)) return rc;
    const fs::path root(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) {
        out << "error: cannot create output directory " << cfg.out_dir << ": " << ec.message() << "\n";
        return 2;
    }

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = config_echo(cfg);
    nlohmann::json inventory = nlohmann::json::object();
    nlohmann::json failures = nlohmann::json::object();
    nlohmann::json timings = nlohmann::json::object();
    bool any_failed = false;

    for (const SymbolInput& input : cfg.data) {
        PreparedSymbol prep;
        std::string prep_error;
        try {
            prep = prepare_symbol(input, cfg.train_fraction);
        } catch (const std::exception& e) {
            prep_error = e.what();
        }

        for (ModelKind kind : cfg.models) {
            const std::string key = input.symbol + "/" + kind_name(kind);
            const auto started = std::chrono::steady_clock::now();
            if (!prep_error.empty()) {
                failures[key] = prep_error;
                any_failed = true;
                out << "[fail] " << key << ": " << prep_error << "\n";
                continue;
            }
            try {
                const TrainConfig tc = config_for(kind, cfg);
                const PairOutput pair = run_pair(prep, kind, tc);

                const fs::path dir = root / input.symbol / kind_name(kind);
                fs::create_directories(dir);
                std::vector<std::string> files;

                write_file(dir / "metrics.json", metrics_json(pair.metrics), files, root);
                write_file(dir / "metrics_table.csv",
                           metrics_table({{input.symbol, pair.metrics}}), files, root);
                write_file(dir / "predictions.csv", predictions_csv(pair.predictions), files, root);
                write_file(dir / "loss_curve.csv", loss_curve_csv(pair.model.loss_curve), files, root);

                ExplainOptions opts;
                opts.seed = cfg.seed;
                opts.shap_samples = cfg.shap_samples;
                opts.lime.n_perturb = cfg.lime_perturb;
                const core::Date last_date = final_target_date(pair.test_windows);
                const Attribution shap_local = explain_final_instance(
                    pair.model, pair.test_windows, pair.train_windows, AttributionMethod::KernelShap, opts);
                write_file(dir / "local_explanation_shap.csv",
                           local_explanation_csv(shap_local, last_date), files, root);
                const Attribution lime_local = explain_final_instance(
                    pair.model, pair.test_windows, pair.train_windows, AttributionMethod::Lime, opts);
                write_file(dir / "local_explanation_lime.csv",
                           local_explanation_csv(lime_local, last_date), files, root);

                const std::vector<Attribution> per_instance =
                    shap_over_dataset(pair, cfg.shap_samples, cfg.seed, cfg.shap_global_instances);
                write_file(dir / "shap_global.csv", shap_global_csv(global_shap_summary(per_instance)),
                           files, root);

                if (plots) {
                    write_file(dir / "predictions.svg",
                               predictions_svg(pair.predictions, key + ": actual vs predicted"),
                               files, root);
                    write_file(dir / "loss_curve.svg",
                               loss_curve_svg(pair.model.loss_curve, key + ": loss per epoch"),
                               files, root);
                }

                inventory[key] = files;
                out << "[ok] " << key << ": mse=" << format_metric(pair.metrics.mse)
                    << " mape=" << format_metric(pair.metrics.mape_percent)
                    << " r2=" << format_metric(pair.metrics.r2) << " (" << files.size()
                    << " files)\n";
            } catch (const std::exception& e) {
                failures[key] = e.what();
                any_failed = true;
                out << "[fail] " << key << ": " << e.what() << "\n";
            }
            const auto elapsed = std::chrono::steady_clock::now() - started;
            timings[key] =
                std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        }
    }

    manifest["files"] = inventory;
    manifest["failures"] = failures;
    manifest["timings_ms"] = timings;
    core::write_text_file((root / "manifest.json").string(), manifest.dump(1) + "\n");
    out << "manifest: " << (root / "manifest.json").generic_string() << "\n";
    return any_failed ? 1 : 0;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
    if (const int rc = check_config(cfg, out)) return rc;
    if (cfg.sweep.empty()) {
        out << "error: sweep list is empty\n";
        return 2;
    }
    const fs::path root(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) {
        out << "error: cannot create output directory " << cfg.out_dir << ": " << ec.message() << "\n";
        return 2;
    }

    struct Row {
        std::string symbol;
        ModelKind kind;
        std::size_t seq_len;
        MetricsReport metrics;
        bool best = false;
    };
    std::vector<Row> rows;
    bool any_failed = false;

    for (const SymbolInput& input : cfg.data) {
        PreparedSymbol prep;
        try {
            prep = prepare_symbol(input, cfg.train_fraction);
        } catch (const std::exception& e) {
            out << "[fail] " << input.symbol << ": " << e.what() << "\n";
            any_failed = true;
            continue;
        }
        for (ModelKind kind : cfg.models) {
            for (std::size_t seq_len : cfg.sweep) {
                TrainConfig tc = config_for(kind, cfg);
                tc.seq_len = seq_len;
                const std::string key =
                    input.symbol + "/" + kind_name(kind) + "/L=" + std::to_string(seq_len);
                try {
                    const PairOutput pair = run_pair(prep, kind, tc);
                    rows.push_back({input.symbol, kind, seq_len, pair.metrics, false});
                    out << "[ok] " << key << ": mse=" << format_metric(pair.metrics.mse) << "\n";
                } catch (const std::exception& e) {
                    any_failed = true;
                    out << "[fail] " << key << ": " << e.what() << "\n";
                }
            }
        }
    }

    // mark the lowest-MSE row per (symbol, model); first row wins ties
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool is_best = true;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (rows[j].symbol != rows[i].symbol || rows[j].kind != rows[i].kind) continue;
            if (rows[j].metrics.mse < rows[i].metrics.mse ||
                (rows[j].metrics.mse == rows[i].metrics.mse && j < i)) {
                is_best = false;
                break;
            }
        }
        rows[i].best = is_best;
    }

    std::string csv = "symbol,model,seq_len,mse,mae,mape_percent,rmse,r2,best\n";
    for (const Row& r : rows) {
        csv += r.symbol + ',' + kind_name(r.kind) + ',' + std::to_string(r.seq_len) + ',' +
               format_metric(r.metrics.mse) + ',' + format_metric(r.metrics.mae) + ',' +
               format_metric(r.metrics.mape_percent) + ',' + format_metric(r.metrics.rmse) + ',' +
               format_metric(r.metrics.r2) + ',' + (r.best ? "*" : "") + '\n';
    }
    core::write_text_file((root / "sweep_table.csv").string(), csv);
    out << csv;
    out << "sweep table: " << (root / "sweep_table.csv").generic_string() << "\n";
    return any_failed ? 1 : 0;
}

int cmd_explain(const ExperimentConfig& cfg, ModelKind kind, AttributionMethod method,
                std::ostream& out) {
    if (const int rc = check_config(cfg, out)) return rc;
    const SymbolInput& input = cfg.data.front();
    try {
        const PreparedSymbol prep = prepare_symbol(input, cfg.train_fraction);
        const TrainConfig tc = config_for(kind, cfg);
        const PairOutput pair = run_pair(prep, kind, tc);

        ExplainOptions opts;
        opts.seed = cfg.seed;
        opts.shap_samples = cfg.shap_samples;
        opts.lime.n_perturb = cfg.lime_perturb;
        const Attribution attribution =
            explain_final_instance(pair.model, pair.test_windows, pair.train_windows, method, opts);
        const core::Date last_date = final_target_date(pair.test_windows);

        const fs::path dir = fs::path(cfg.out_dir) / input.symbol / kind_name(kind);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            out << "error: cannot create output directory " << dir.generic_string() << ": "
                << ec.message() << "\n";
            return 2;
        }
        const std::string stem =
            method == AttributionMethod::KernelShap ? "shap" : method_name(method);
        const fs::path file = dir / ("local_explanation_" + stem + ".csv");
        core::write_text_file(file.string(), local_explanation_csv(attribution, last_date));

        out << "explained " << input.symbol << "/" << kind_name(kind) << " at "
            << last_date.to_string() << " with " << method_name(attribution.method) << "\n";
        out << "base_value=" << core::format_double(attribution.base_value)
            << " prediction=" << core::format_double(attribution.prediction) << "\n";
        const std::size_t top = std::min<std::size_t>(10, attribution.feature_names.size());
        std::vector<std::size_t> order(attribution.feature_names.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double fa = std::fabs(attribution.scores[a]), fb = std::fabs(attribution.scores[b]);
            if (fa != fb) return fa > fb;
            return attribution.feature_names[a] < attribution.feature_names[b];
        });
        for (std::size_t i = 0; i < top; ++i) {
            out << "  " << attribution.feature_names[order[i]] << " = "
                << core::format_double(attribution.scores[order[i]]) << "\n";
        }
        out << "wrote " << file.generic_string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace seqcast
