#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "seqcast/experiment.hpp"
#include "seqcast/version.hpp"

namespace {

seqcast::ExperimentConfig load_with_overrides(const std::string& config_path,
                                              const std::string& out_dir, bool has_seed,
                                              std::uint64_t seed, bool has_seq_len,
                                              std::size_t seq_len, const std::string& only_model) {
    seqcast::ExperimentConfig cfg = seqcast::load_experiment_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (has_seed) cfg.seed = seed;
    if (has_seq_len) cfg.seq_len = seq_len;
    if (!only_model.empty()) cfg.models = {seqcast::parse_kind(only_model)};
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seqcast: OHLCV ingestion, technical indicators, four windowed forecasting "
                 "architectures, five-metric evaluation, and SHAP/LIME attribution"};
    app.set_version_flag("--version", std::string(seqcast::kVersion));
    app.require_subcommand(1);

    std::string validate_csv;
    CLI::App* validate = app.add_subcommand("validate", "Check an OHLCV CSV and list findings");
    validate->add_option("csv", validate_csv, "date,open,high,low,close,volume file")->required();

    std::string feat_csv, feat_out = "features.csv";
    CLI::App* featurize =
        app.add_subcommand("featurize", "Write the indicator feature table for an OHLCV CSV");
    featurize->add_option("csv", feat_csv, "date,open,high,low,close,volume file")->required();
    featurize->add_option("--out", feat_out, "output CSV path (default features.csv)");

    std::string run_config, run_out, run_model;
    std::uint64_t run_seed = 0;
    std::size_t run_seq_len = 0;
    bool run_plots = false;
    CLI::App* run = app.add_subcommand("run", "Train, evaluate, and explain every (symbol, model) pair");
    run->add_option("--config", run_config, "experiment JSON")->required();
    run->add_option("--out", run_out, "override the config's output directory");
    CLI::Option* run_seed_opt = run->add_option("--seed", run_seed, "override the config's seed");
    CLI::Option* run_len_opt = run->add_option("--seq-len", run_seq_len, "override every model's sequence length");
    run->add_option("--model", run_model, "restrict the run to one architecture");
    run->add_flag("--plots", run_plots, "also emit SVG charts");

    std::string sweep_config, sweep_out, sweep_model;
    std::uint64_t sweep_seed = 0;
    CLI::App* sweep =
        app.add_subcommand("sweep", "Train every (model, sequence length) combination from the config");
    sweep->add_option("--config", sweep_config, "experiment JSON")->required();
    sweep->add_option("--out", sweep_out, "override the config's output directory");
    CLI::Option* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, "override the config's seed");
    sweep->add_option("--model", sweep_model, "restrict the sweep to one architecture");

    std::string explain_config, explain_out, explain_model = "dlinear", explain_method = "shap";
    std::uint64_t explain_seed = 0;
    std::size_t explain_seq_len = 0;
    CLI::App* explain =
        app.add_subcommand("explain", "Explain the final test instance of one (symbol, model) pair");
    explain->add_option("--config", explain_config, "experiment JSON")->required();
    explain->add_option("--model", explain_model, "architecture to explain (default dlinear)");
    explain->add_option("--method", explain_method, "shap, lime, or exact (default shap)");
    explain->add_option("--out", explain_out, "override the config's output directory");
    CLI::Option* explain_seed_opt = explain->add_option("--seed", explain_seed, "override the config's seed");
    CLI::Option* explain_len_opt =
        explain->add_option("--seq-len", explain_seq_len, "override the model's sequence length");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return seqcast::cmd_validate(validate_csv, std::cout);
        if (featurize->parsed()) return seqcast::cmd_featurize(feat_csv, feat_out, std::cout);
        if (run->parsed()) {
            const auto cfg = load_with_overrides(run_config, run_out, run_seed_opt->count() > 0,
                                                 run_seed, run_len_opt->count() > 0, run_seq_len,
                                                 run_model);
            return seqcast::cmd_run(cfg, run_plots, std::cout);
        }
        if (sweep->parsed()) {
            const auto cfg = load_with_overrides(sweep_config, sweep_out,
                                                 sweep_seed_opt->count() > 0, sweep_seed, false, 0,
                                                 sweep_model);
            return seqcast::cmd_sweep(cfg, std::cout);
        }
        if (explain->parsed()) {
            const auto cfg = load_with_overrides(explain_config, explain_out,
                                                 explain_seed_opt->count() > 0, explain_seed,
                                                 explain_len_opt->count() > 0, explain_seq_len, "");
            return seqcast::cmd_explain(cfg, seqcast::parse_kind(explain_model),
                                        seqcast::parse_method(explain_method), std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;  // unreachable: a subcommand is required
}
