#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace seqcast {

/// The five regression metrics computed on de-normalized (price-unit)
/// predictions, plus the sample count they cover.
struct MetricsReport {
    double mse = 0.0;
    double mae = 0.0;
    double mape_percent = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// MSE, MAE, MAPE (percent), RMSE = sqrt(MSE), and R^2 (total-sum-of-squares
/// form, may be negative). Throws on length mismatch or fewer than two
/// points; on constant y_true (R^2 undefined); and on any zero in y_true
/// (MAPE undefined).
MetricsReport evaluate(const std::vector<double>& y_true, const std::vector<double>& y_pred);

/// Value at exactly four decimal places. Rounds the shortest round-trip
/// decimal form of the value, ties away from zero — so a value printed as
/// 0.99325 formats to "0.9933" even when its binary neighbor sits a hair
/// below the decimal tie.
std::string format_metric(double value);

/// CSV with one row per symbol in lexicographic order:
/// `symbol,mse,mae,mape_percent,rmse,r2`, all metrics at four decimals.
std::string metrics_table(const std::map<std::string, MetricsReport>& per_symbol);

/// JSON object with keys mse, mae, mape_percent, rmse, r2, n at full
/// round-trip precision.
std::string metrics_json(const MetricsReport& report);

}  // namespace seqcast
