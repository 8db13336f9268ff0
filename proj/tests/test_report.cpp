#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "seqcast/core/date.hpp"
#include "seqcast/experiment.hpp"
#include "seqcast/report.hpp"

using namespace seqcast;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::vector<Prediction> sample_predictions() {
    return {
        {core::Date{2021, 3, 1}, 101.5, 100.25},
        {core::Date{2021, 3, 2}, 102.0, 101.75},
        {core::Date{2021, 3, 3}, 101.0, 101.5},
    };
}

}  // namespace

TEST_SUITE_BEGIN("report");

TEST_CASE("predictions_csv emits one dated row per prediction") {
    const std::string got = predictions_csv(sample_predictions());
    CHECK(got ==
          "date,y_true,y_pred\n"
          "2021-03-01,101.5,100.25\n"
          "2021-03-02,102,101.75\n"
          "2021-03-03,101,101.5\n");
    CHECK(predictions_csv({}) == "date,y_true,y_pred\n");
}

TEST_CASE("loss_curve_csv numbers epochs from one") {
    const std::vector<EpochLoss> curve{{0.5, 0.25}, {0.125, 0.0625}};
    CHECK(loss_curve_csv(curve) ==
          "epoch,train_loss,test_loss\n"
          "1,0.5,0.25\n"
          "2,0.125,0.0625\n");
}

TEST_CASE("shap_global_csv preserves the summary's ranking") {
    GlobalSummary summary;
    summary.feature_names = {"close_t1", "RSI_14_t2"};
    summary.mean_abs_scores = {2.0, 1.0};
    CHECK(shap_global_csv(summary) ==
          "feature,mean_abs_shap\n"
          "close_t1,2\n"
          "RSI_14_t2,1\n");
}

TEST_CASE("local_explanation_csv writes header records then scores") {
    Attribution a;
    a.method = AttributionMethod::KernelShap;
    a.feature_names = {"close_t2", "close_t1"};
    a.scores = {0.5, 0.25};
    a.base_value = 0.5;
    a.prediction = 1.25;
    CHECK(local_explanation_csv(a, core::Date{2021, 4, 5}) ==
          "method,kernel_shap\n"
          "base_value,0.5\n"
          "prediction,1.25\n"
          "target_date,2021-04-05\n"
          "feature,score\n"
          "close_t2,0.5\n"
          "close_t1,0.25\n");

    a.method = AttributionMethod::Lime;
    CHECK(contains(local_explanation_csv(a, core::Date{2021, 4, 5}), "method,lime\n"));
}

TEST_CASE("prediction chart is a self-contained SVG") {
    const std::string svg = predictions_svg(sample_predictions(), "DEMO: actual vs predicted");
    CHECK(contains(svg, "<svg"));
    CHECK(contains(svg, "</svg>"));
    CHECK(contains(svg, "DEMO: actual vs predicted"));
    CHECK(contains(svg, "polyline"));
    CHECK(contains(svg, ">actual<"));
    CHECK(contains(svg, ">predicted<"));
    CHECK(contains(svg, ">test day<"));
    CHECK(contains(svg, ">3</text>"));  // x axis ends at the sample count
    CHECK_FALSE(contains(svg, "href"));
    CHECK_FALSE(contains(svg, "nan"));
    CHECK_THROWS_WITH_AS(predictions_svg({}, "empty"), doctest::Contains("empty"),
                         std::invalid_argument);
}

TEST_CASE("loss chart labels its series and survives degenerate input") {
    const std::vector<EpochLoss> curve{{0.5, 0.5}, {0.5, 0.5}};  // flat: hi == lo branch
    const std::string svg = loss_curve_svg(curve, "loss");
    CHECK(contains(svg, "<svg"));
    CHECK(contains(svg, ">train<"));
    CHECK(contains(svg, ">test<"));
    CHECK(contains(svg, ">epoch<"));
    CHECK_FALSE(contains(svg, "nan"));
    CHECK_FALSE(contains(svg, "inf"));

    // a single epoch exercises the centered-x branch
    const std::string one = loss_curve_svg({{1.0, 2.0}}, "one epoch");
    CHECK(contains(one, "<svg"));
    CHECK_FALSE(contains(one, "nan"));
    CHECK_THROWS_AS(loss_curve_svg({}, "none"), std::invalid_argument);
}

TEST_CASE("experiment config parsing") {
    SUBCASE("a full config lands in every field") {
        const ExperimentConfig cfg = parse_experiment_config(R"({
            "data": [{"symbol": "ABC", "csv": "abc.csv"}, {"symbol": "XYZ", "csv": "x.csv"}],
            "models": ["dlinear", "tst"],
            "out_dir": "results",
            "seed": 7,
            "train_fraction": 0.75,
            "sweep": [5, 10],
            "train": {"epochs": 3, "learning_rate": 0.01, "batch_size": 16,
                      "seq_len": 12, "dropout": 0.25},
            "shap_samples": 300,
            "lime_perturb": 123,
            "shap_global_instances": 4
        })");
        REQUIRE(cfg.data.size() == 2);
        CHECK(cfg.data[0].symbol == "ABC");
        CHECK(cfg.data[0].csv_path == "abc.csv");
        CHECK(cfg.data[1].symbol == "XYZ");
        CHECK(cfg.models == std::vector<ModelKind>{ModelKind::DLinear, ModelKind::TST});
        CHECK(cfg.out_dir == "results");
        CHECK(cfg.seed == 7);
        CHECK(cfg.train_fraction == 0.75);
        CHECK(cfg.sweep == std::vector<std::size_t>{5, 10});
        REQUIRE(cfg.epochs.has_value());
        CHECK(*cfg.epochs == 3);
        REQUIRE(cfg.learning_rate.has_value());
        CHECK(*cfg.learning_rate == 0.01);
        REQUIRE(cfg.batch_size.has_value());
        CHECK(*cfg.batch_size == 16);
        REQUIRE(cfg.seq_len.has_value());
        CHECK(*cfg.seq_len == 12);
        REQUIRE(cfg.dropout.has_value());
        CHECK(*cfg.dropout == 0.25);
        CHECK(cfg.shap_samples == 300);
        CHECK(cfg.lime_perturb == 123);
        CHECK(cfg.shap_global_instances == 4);
    }
    SUBCASE("omitted fields keep their defaults") {
        const ExperimentConfig cfg = parse_experiment_config(
            R"({"data": [{"symbol": "A", "csv": "a.csv"}], "models": ["lstnet"]})");
        CHECK(cfg.out_dir == "out");
        CHECK(cfg.seed == 42);
        CHECK(cfg.train_fraction == 0.8);
        CHECK(cfg.sweep == std::vector<std::size_t>{5, 10, 30, 60});
        CHECK_FALSE(cfg.epochs.has_value());
        CHECK_FALSE(cfg.learning_rate.has_value());
        CHECK_FALSE(cfg.batch_size.has_value());
        CHECK_FALSE(cfg.seq_len.has_value());
        CHECK_FALSE(cfg.dropout.has_value());
        CHECK(cfg.shap_samples == 0);
        CHECK(cfg.lime_perturb == 5000);
        CHECK(cfg.shap_global_instances == 0);
    }
    SUBCASE("structural problems carry readable messages") {
        CHECK_THROWS_WITH_AS(parse_experiment_config("not json"),
                             doctest::Contains("not valid JSON"), std::runtime_error);
        CHECK_THROWS_WITH_AS(parse_experiment_config("[1, 2]"),
                             doctest::Contains("root must be a JSON object"), std::runtime_error);
        CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"models": ["dlinear"]})"),
                             doctest::Contains("non-empty 'data'"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            parse_experiment_config(R"({"data": [{"symbol": "A", "csv": "a.csv"}]})"),
            doctest::Contains("non-empty 'models'"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            parse_experiment_config(R"({"data": [{"symbol": "A"}], "models": ["dlinear"]})"),
            doctest::Contains("malformed config"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            parse_experiment_config(R"({"data": [{"symbol": "", "csv": "a.csv"}],
                                        "models": ["dlinear"]})"),
            doctest::Contains("empty symbol"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            parse_experiment_config(R"({"data": [{"symbol": "A", "csv": "a.csv"}],
                                        "models": ["mamba"]})"),
            doctest::Contains("unknown model kind"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            parse_experiment_config(R"({"data": [{"symbol": "A", "csv": "a.csv"}],
                                        "models": ["dlinear"], "train_fraction": 1.0})"),
            doctest::Contains("strictly between 0 and 1"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            parse_experiment_config(R"({"data": [{"symbol": "A", "csv": "a.csv"}],
                                        "models": ["dlinear"], "sweep": []})"),
            doctest::Contains("must not be empty"), std::runtime_error);
        CHECK_THROWS_WITH_AS(
            parse_experiment_config(R"({"data": [{"symbol": "A", "csv": "a.csv"}],
                                        "models": ["dlinear"], "sweep": [5, 0]})"),
            doctest::Contains(">= 1"), std::runtime_error);
    }
}

TEST_SUITE_END();
