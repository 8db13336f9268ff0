#include "seqcast/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqcast/core/csv.hpp"

namespace seqcast {

std::size_t FeatureTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < column_names.size(); ++i) {
        if (column_names[i] == name) return i;
    }
    throw std::invalid_argument("unknown column '" + name + "'");
}

const std::vector<double>& FeatureTable::column(const std::string& name) const {
    return columns[column_index(name)];
}

const std::vector<std::string>& canonical_columns() {
    static const std::vector<std::string> names = {
        "open", "high", "low", "close", "volume",
        "EMA_25", "EMA_50", "EMA_100", "EMA_200", "EMA_300",
        "RSI_14", "ATR_14",
        "BB_Middle", "BB_Upper", "BB_Lower",
        "Tenkan_Sen", "Kijun_Sen", "Senkou_Span_A", "Senkou_Span_B", "Chikou_Span",
        "MACD", "MACD_Signal", "MACD_Histogram",
        "MA_200", "MA_300",
    };
    return names;
}

namespace {

void check_window(std::size_t window, const char* op) {
    if (window == 0) throw std::invalid_argument(std::string(op) + " window must be >= 1");
}

IndicatorSeries blank(std::string name, std::size_t n) {
    IndicatorSeries s;
    s.name = std::move(name);
    s.values.assign(n, std::nullopt);
    return s;
}

/// Mean of values[begin..end]; an all-equal window short-circuits to the
/// common value because sum-then-divide can land one ulp off even for
/// constants (the mean of n equal values IS that value).
double span_mean(const std::vector<double>& values, std::size_t begin, std::size_t end) {
    bool constant = true;
    for (std::size_t j = begin + 1; j <= end && constant; ++j) constant = values[j] == values[begin];
    if (constant) return values[begin];
    double acc = 0.0;
    for (std::size_t j = begin; j <= end; ++j) acc += values[j];
    return acc / static_cast<double>(end - begin + 1);
}

/// Trailing-window mean computed by direct summation at every index — no
/// running-sum recurrence, so there is no drift to accumulate across a long
/// series.
IndicatorSeries windowed_mean(const std::vector<double>& values, std::size_t window,
                              std::string name) {
    IndicatorSeries out = blank(std::move(name), values.size());
    if (window > values.size()) return out;
    for (std::size_t i = window - 1; i < values.size(); ++i) {
        out.values[i] = span_mean(values, i + 1 - window, i);
    }
    return out;
}

}  // namespace

IndicatorSeries sma(const std::vector<double>& values, std::size_t window) {
    check_window(window, "sma");
    return windowed_mean(values, window, "SMA_" + std::to_string(window));
}

IndicatorSeries ema(const std::vector<double>& values, std::size_t window) {
    check_window(window, "ema");
    IndicatorSeries out = blank("EMA_" + std::to_string(window), values.size());
    if (window > values.size()) return out;
    double value = span_mean(values, 0, window - 1);  // SMA seed
    out.values[window - 1] = value;
    const double alpha = 2.0 / (static_cast<double>(window) + 1.0);
    for (std::size_t i = window; i < values.size(); ++i) {
        // incremental form of alpha*x + (1-alpha)*prev; exact at fixed points
        value += alpha * (values[i] - value);
        out.values[i] = value;
    }
    return out;
}

IndicatorSeries rsi(const std::vector<double>& close, std::size_t window) {
    check_window(window, "rsi");
    IndicatorSeries out = blank("RSI_" + std::to_string(window), close.size());
    if (close.size() < window + 1) return out;

    auto rsi_value = [](double avg_gain, double avg_loss) {
        if (avg_loss == 0.0) return 100.0;
        if (avg_gain == 0.0) return 0.0;
        return 100.0 - 100.0 / (1.0 + avg_gain / avg_loss);
    };

    double gain_acc = 0.0, loss_acc = 0.0;
    for (std::size_t i = 1; i <= window; ++i) {
        const double d = close[i] - close[i - 1];
        if (d > 0.0) gain_acc += d;
        if (d < 0.0) loss_acc -= d;
    }
    double avg_gain = gain_acc / static_cast<double>(window);
    double avg_loss = loss_acc / static_cast<double>(window);
    out.values[window] = rsi_value(avg_gain, avg_loss);

    const double w = static_cast<double>(window);
    for (std::size_t i = window + 1; i < close.size(); ++i) {
        const double d = close[i] - close[i - 1];
        const double gain = d > 0.0 ? d : 0.0;
        const double loss = d < 0.0 ? -d : 0.0;
        // Wilder smoothing (avg*(w-1) + x)/w in incremental form
        avg_gain += (gain - avg_gain) / w;
        avg_loss += (loss - avg_loss) / w;
        out.values[i] = rsi_value(avg_gain, avg_loss);
    }
    return out;
}

IndicatorSeries atr(const std::vector<double>& high, const std::vector<double>& low,
                    const std::vector<double>& close, std::size_t window) {
    check_window(window, "atr");
    if (high.size() != low.size() || high.size() != close.size()) {
        throw std::invalid_argument("atr input lengths differ");
    }
    IndicatorSeries out = blank("ATR_" + std::to_string(window), close.size());
    if (close.size() < window + 1) return out;

    auto true_range = [&](std::size_t i) {
        const double hl = high[i] - low[i];
        const double hc = std::fabs(high[i] - close[i - 1]);
        const double lc = std::fabs(low[i] - close[i - 1]);
        return std::max(hl, std::max(hc, lc));
    };

    double acc = 0.0;
    for (std::size_t i = 1; i <= window; ++i) acc += true_range(i);
    double value = acc / static_cast<double>(window);
    out.values[window] = value;
    const double w = static_cast<double>(window);
    for (std::size_t i = window + 1; i < close.size(); ++i) {
        value += (true_range(i) - value) / w;
        out.values[i] = value;
    }
    return out;
}

BollingerBands bollinger(const std::vector<double>& close, std::size_t window, double k) {
    check_window(window, "bollinger");
    BollingerBands bands;
    bands.middle = windowed_mean(close, window, "BB_Middle");
    bands.upper = blank("BB_Upper", close.size());
    bands.lower = blank("BB_Lower", close.size());
    if (window > close.size()) return bands;
    for (std::size_t i = window - 1; i < close.size(); ++i) {
        const double mid = *bands.middle.values[i];
        double acc = 0.0;
        for (std::size_t j = i + 1 - window; j <= i; ++j) {
            const double d = close[j] - mid;
            acc += d * d;
        }
        const double sigma = std::sqrt(acc / static_cast<double>(window));  // population
        bands.upper.values[i] = mid + k * sigma;
        bands.lower.values[i] = mid - k * sigma;
    }
    return bands;
}

namespace {

/// (max high + min low)/2 over the `window` rows ending at `end` inclusive.
double midline(const std::vector<double>& high, const std::vector<double>& low,
               std::size_t end, std::size_t window) {
    double hi = high[end + 1 - window], lo = low[end + 1 - window];
    for (std::size_t j = end + 2 - window; j <= end; ++j) {
        hi = std::max(hi, high[j]);
        lo = std::min(lo, low[j]);
    }
    return (hi + lo) / 2.0;
}

}  // namespace

IchimokuLines ichimoku(const std::vector<double>& high, const std::vector<double>& low,
                       const std::vector<double>& close) {
    if (high.size() != low.size() || high.size() != close.size()) {
        throw std::invalid_argument("ichimoku input lengths differ");
    }
    const std::size_t n = close.size();
    constexpr std::size_t kTenkan = 9, kKijun = 26, kSenkouB = 52, kShift = 26;

    IchimokuLines lines;
    lines.tenkan = blank("Tenkan_Sen", n);
    lines.kijun = blank("Kijun_Sen", n);
    lines.senkou_a = blank("Senkou_Span_A", n);
    lines.senkou_b = blank("Senkou_Span_B", n);
    lines.chikou = blank("Chikou_Span", n);

    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 >= kTenkan) lines.tenkan.values[i] = midline(high, low, i, kTenkan);
        if (i + 1 >= kKijun) lines.kijun.values[i] = midline(high, low, i, kKijun);
        // Senkou spans become visible `kShift` periods after they are formed,
        // so row i only reads rows <= i - kShift.
        if (i >= kShift) {
            const std::size_t base = i - kShift;
            if (lines.tenkan.values[base] && lines.kijun.values[base]) {
                lines.senkou_a.values[i] = (*lines.tenkan.values[base] + *lines.kijun.values[base]) / 2.0;
            }
            if (base + 1 >= kSenkouB) lines.senkou_b.values[i] = midline(high, low, base, kSenkouB);
        }
        lines.chikou.values[i] = close[i];
    }
    return lines;
}

MacdLines macd(const std::vector<double>& close, std::size_t fast, std::size_t slow,
               std::size_t signal_window) {
    if (fast >= slow) {
        throw std::invalid_argument("macd fast period must be smaller than slow, got " +
                                    std::to_string(fast) + " vs " + std::to_string(slow));
    }
    check_window(signal_window, "macd signal");
    const std::size_t n = close.size();
    MacdLines lines;
    lines.macd = blank("MACD", n);
    lines.signal = blank("MACD_Signal", n);
    lines.histogram = blank("MACD_Histogram", n);

    IndicatorSeries ema_fast = ema(close, fast);
    IndicatorSeries ema_slow = ema(close, slow);
    std::vector<double> defined;  // macd values from index slow-1 on
    for (std::size_t i = 0; i < n; ++i) {
        if (ema_fast.values[i] && ema_slow.values[i]) {
            lines.macd.values[i] = *ema_fast.values[i] - *ema_slow.values[i];
            defined.push_back(*lines.macd.values[i]);
        }
    }
    // the signal line is an EMA over the defined MACD values only
    IndicatorSeries sig = ema(defined, signal_window);
    const std::size_t offset = n - defined.size();
    for (std::size_t j = 0; j < defined.size(); ++j) {
        if (sig.values[j]) {
            lines.signal.values[offset + j] = *sig.values[j];
            lines.histogram.values[offset + j] = *lines.macd.values[offset + j] - *sig.values[j];
        }
    }
    return lines;
}

FeatureTable build_feature_table(const OhlcvSeries& series) {
    const std::size_t n = series.bars.size();
    std::vector<double> open(n), high(n), low(n), close(n), volume(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Bar& b = series.bars[i];
        open[i] = b.open;
        high[i] = b.high;
        low[i] = b.low;
        close[i] = b.close;
        volume[i] = b.volume;
    }

    std::vector<IndicatorSeries> indicator_cols;
    indicator_cols.reserve(20);
    for (std::size_t w : {25u, 50u, 100u, 200u, 300u}) indicator_cols.push_back(ema(close, w));
    indicator_cols.push_back(rsi(close));
    indicator_cols.push_back(atr(high, low, close));
    BollingerBands bands = bollinger(close);
    indicator_cols.push_back(std::move(bands.middle));
    indicator_cols.push_back(std::move(bands.upper));
    indicator_cols.push_back(std::move(bands.lower));
    IchimokuLines cloud = ichimoku(high, low, close);
    indicator_cols.push_back(std::move(cloud.tenkan));
    indicator_cols.push_back(std::move(cloud.kijun));
    indicator_cols.push_back(std::move(cloud.senkou_a));
    indicator_cols.push_back(std::move(cloud.senkou_b));
    indicator_cols.push_back(std::move(cloud.chikou));
    MacdLines macd_lines = macd(close);
    indicator_cols.push_back(std::move(macd_lines.macd));
    indicator_cols.push_back(std::move(macd_lines.signal));
    indicator_cols.push_back(std::move(macd_lines.histogram));
    IndicatorSeries ma200 = sma(close, 200);
    ma200.name = "MA_200";
    indicator_cols.push_back(std::move(ma200));
    IndicatorSeries ma300 = sma(close, 300);
    ma300.name = "MA_300";
    indicator_cols.push_back(std::move(ma300));

    // First-defined index each canonical indicator column requires, in the
    // same order as indicator_cols. Used to name the binding column when the
    // series is too short (an all-absent column cannot report its own need).
    static constexpr std::size_t kRequiredFd[20] = {
        24, 49, 99, 199, 299,  // EMA_25..EMA_300
        14, 14,                // RSI_14, ATR_14
        19, 19, 19,            // Bollinger bands
        8, 25, 51, 77, 0,      // Ichimoku lines
        25, 33, 33,            // MACD triple
        199, 299,              // MA_200, MA_300
    };
    std::size_t binding = 0;
    for (std::size_t c = 1; c < indicator_cols.size(); ++c) {
        if (kRequiredFd[c] > kRequiredFd[binding]) binding = c;  // ties keep canonical order
    }
    if (n <= kRequiredFd[binding]) {
        throw std::invalid_argument("series too short to build features: column " +
                                    indicator_cols[binding].name + " needs at least " +
                                    std::to_string(kRequiredFd[binding] + 1) + " rows, got " +
                                    std::to_string(n));
    }
    // Warm-up = latest first-defined index over all columns.
    std::size_t warmup = 0;
    for (const auto& col : indicator_cols) warmup = std::max(warmup, col.first_defined());

    FeatureTable table;
    table.symbol = series.symbol;
    table.column_names = canonical_columns();
    const std::size_t rows = n - warmup;
    table.dates.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) table.dates[i] = series.bars[warmup + i].date;

    table.columns.resize(25);
    const std::vector<double>* raw[5] = {&open, &high, &low, &close, &volume};
    for (std::size_t c = 0; c < 5; ++c) {
        table.columns[c].assign(raw[c]->begin() + static_cast<std::ptrdiff_t>(warmup), raw[c]->end());
    }
    for (std::size_t c = 0; c < indicator_cols.size(); ++c) {
        auto& dst = table.columns[5 + c];
        dst.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) dst[i] = *indicator_cols[c].values[warmup + i];
    }
    return table;
}

std::string feature_table_csv(const FeatureTable& table) {
    std::string out = "date";
    for (const auto& name : table.column_names) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
        out += table.dates[i].to_string();
        for (const auto& col : table.columns) {
            out += ',';
            out += core::format_double(col[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace seqcast
