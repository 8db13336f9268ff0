#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqcast/core/date.hpp"
#include "seqcast/market_data.hpp"

namespace seqcast {

/// One indicator column aligned 1:1 with the input bars. Values are absent
/// during the leading warm-up span and defined ever after (never absent in
/// the middle).
struct IndicatorSeries {
    std::string name;
    std::vector<std::optional<double>> values;

    /// Index of the first defined value, or the length when all are absent.
    std::size_t first_defined() const {
        std::size_t i = 0;
        while (i < values.size() && !values[i].has_value()) ++i;
        return i;
    }
};

/// Model-ready feature matrix: raw bars plus every indicator, warm-up rows
/// dropped so no value is absent. Column order is fixed: open, high, low,
/// close, volume, then the indicator columns in canonical order.
struct FeatureTable {
    std::string symbol;
    std::vector<core::Date> dates;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;  // parallel to column_names
    std::string target_column = "close";
    bool normalized = false;  // set by apply_minmax, carried into windows

    std::size_t n_rows() const { return dates.size(); }
    std::size_t n_cols() const { return columns.size(); }
    std::size_t column_index(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
};

/// The 25 canonical FeatureTable column names in order.
const std::vector<std::string>& canonical_columns();

// Every indicator returns an all-absent series (not an error) when the input
// is shorter than its lookback; a zero window throws std::invalid_argument.

/// Arithmetic mean over the trailing `window` values.
IndicatorSeries sma(const std::vector<double>& values, std::size_t window);

/// Exponential moving average, alpha = 2/(window+1), seeded with the SMA of
/// the first `window` values.
IndicatorSeries ema(const std::vector<double>& values, std::size_t window);

/// Relative strength index with Wilder smoothing; first defined at index
/// `window`. avgLoss = 0 maps to 100, avgGain = 0 maps to 0.
IndicatorSeries rsi(const std::vector<double>& close, std::size_t window = 14);

/// Average true range with Wilder smoothing; first defined at index `window`.
IndicatorSeries atr(const std::vector<double>& high, const std::vector<double>& low,
                    const std::vector<double>& close, std::size_t window = 14);

struct BollingerBands {
    IndicatorSeries middle, upper, lower;
};

/// Middle = SMA(window); upper/lower = middle +- k * population sigma over
/// the same window.
BollingerBands bollinger(const std::vector<double>& close, std::size_t window = 20,
                         double k = 2.0);

struct IchimokuLines {
    IndicatorSeries tenkan, kijun, senkou_a, senkou_b, chikou;
};

/// Standard periods (9, 26, 52). Senkou spans are stored at the row where
/// they become visible, i.e. they read only data from >= 26 periods earlier.
/// Chikou is stored as close[t] at row t — the conventional "close plotted 26
/// back" would need future data as a time-t feature.
IchimokuLines ichimoku(const std::vector<double>& high, const std::vector<double>& low,
                       const std::vector<double>& close);

struct MacdLines {
    IndicatorSeries macd, signal, histogram;
};

/// MACD = EMA(fast) - EMA(slow); signal = EMA of the defined MACD values over
/// `signal_window`; histogram = MACD - signal.
MacdLines macd(const std::vector<double>& close, std::size_t fast = 12,
               std::size_t slow = 26, std::size_t signal_window = 9);

/// Computes every canonical column and drops each leading row where any
/// column is still absent. Throws std::invalid_argument naming the binding
/// column when the series is too short to leave at least one row.
FeatureTable build_feature_table(const OhlcvSeries& series);

/// FeatureTable as CSV: `date` plus the canonical columns, full precision.
std::string feature_table_csv(const FeatureTable& table);

}  // namespace seqcast
