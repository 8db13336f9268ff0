#include "seqcast/market_data.hpp"

#include <algorithm>
#include <stdexcept>

#include "seqcast/core/csv.hpp"

namespace seqcast {

namespace {

const char* const kColumns[6] = {"date", "open", "high", "low", "close", "volume"};

std::string row_label(std::size_t row) { return "row " + std::to_string(row); }

/// Bar-level invariant checks shared by parsing and validation. `row` is the
/// index reported in findings.
void check_bar(const Bar& bar, std::size_t row, std::vector<Finding>& errors) {
    const double prices[4] = {bar.open, bar.high, bar.low, bar.close};
    const char* names[4] = {"open", "high", "low", "close"};
    for (int i = 0; i < 4; ++i) {
        if (!(prices[i] > 0.0)) {
            errors.push_back({row, "positive price",
                              std::string(names[i]) + " must be positive at " + row_label(row)});
        }
    }
    if (bar.volume < 0.0) {
        errors.push_back({row, "non-negative volume", "volume must be >= 0 at " + row_label(row)});
    }
    if (bar.low > bar.high) {
        errors.push_back({row, "low <= high", "low <= high violated at " + row_label(row)});
    }
    if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close)) {
        errors.push_back({row, "ohlc range",
                          "open/close must lie within [low, high] at " + row_label(row)});
    }
}

}  // namespace

ParsedCsv parse_ohlcv_csv_lenient(const std::string& path, const std::string& symbol) {
    ParsedCsv out;
    out.series.symbol = symbol;
    auto& errors = out.report.errors;

    core::CsvTable table;
    try {
        table = core::read_csv(path);
    } catch (const std::exception& e) {
        errors.push_back({0, "io", e.what()});
        return out;
    }
    if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty())) {
        errors.push_back({0, "empty file", "empty file: " + path});
        return out;
    }
    if (table.header.size() != 6) {
        errors.push_back({0, "header",
                          "expected 6 columns date,open,high,low,close,volume, found " +
                              std::to_string(table.header.size())});
        return out;
    }
    for (int i = 0; i < 6; ++i) {
        if (table.header[static_cast<std::size_t>(i)] != kColumns[i]) {
            errors.push_back({0, "header",
                              std::string("column ") + std::to_string(i + 1) + " must be '" +
                                  kColumns[i] + "', found '" + table.header[static_cast<std::size_t>(i)] + "'"});
            return out;
        }
    }
    if (table.rows.empty()) {
        errors.push_back({0, "empty file", "no data rows in " + path});
        return out;
    }

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& fields = table.rows[r];
        const std::size_t file_row = r + 1;  // 0 is the header
        if (fields.size() != 6) {
            errors.push_back({file_row, "field count",
                              row_label(file_row) + " has " + std::to_string(fields.size()) +
                                  " fields, expected 6"});
            continue;
        }
        Bar bar;
        if (!core::parse_date(fields[0], bar.date)) {
            errors.push_back({file_row, "date format",
                              "unparseable date '" + fields[0] + "' in column date at " + row_label(file_row)});
            continue;
        }
        double* slots[5] = {&bar.open, &bar.high, &bar.low, &bar.close, &bar.volume};
        bool numeric_ok = true;
        for (int c = 0; c < 5; ++c) {
            if (!core::parse_double(fields[static_cast<std::size_t>(c + 1)], *slots[c])) {
                errors.push_back({file_row, "number format",
                                  "unparseable number '" + fields[static_cast<std::size_t>(c + 1)] +
                                      "' in column " + kColumns[c + 1] + " at " + row_label(file_row)});
                numeric_ok = false;
                break;
            }
        }
        if (!numeric_ok) continue;
        out.series.bars.push_back(bar);
    }

    auto& bars = out.series.bars;
    std::stable_sort(bars.begin(), bars.end(),
                     [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].date == bars[i - 1].date) {
            errors.push_back({i, "duplicate date",
                              "duplicate date " + bars[i].date.to_string() + " at rows " +
                                  std::to_string(i - 1) + " and " + std::to_string(i)});
        }
    }
    return out;
}

OhlcvSeries parse_ohlcv_csv(const std::string& path, const std::string& symbol) {
    ParsedCsv parsed = parse_ohlcv_csv_lenient(path, symbol);
    if (!parsed.report.ok()) {
        throw std::runtime_error("parse error in " + path + ": " + parsed.report.errors.front().message);
    }
    ValidationReport report = validate_series(parsed.series);
    if (!report.ok()) {
        throw std::runtime_error("invalid data in " + path + ": " + report.errors.front().message);
    }
    return parsed.series;
}

ValidationReport validate_series(const OhlcvSeries& series) {
    ValidationReport report;
    if (series.bars.empty()) {
        report.errors.push_back({0, "non-empty", "series holds no bars"});
        return report;
    }
    for (std::size_t i = 0; i < series.bars.size(); ++i) {
        check_bar(series.bars[i], i, report.errors);
    }
    for (std::size_t i = 1; i < series.bars.size(); ++i) {
        const core::Date& prev = series.bars[i - 1].date;
        const core::Date& cur = series.bars[i].date;
        if (cur == prev) {
            report.errors.push_back({i, "duplicate date",
                                     "duplicate date " + cur.to_string() + " at rows " +
                                         std::to_string(i - 1) + " and " + std::to_string(i)});
        } else if (cur < prev) {
            report.errors.push_back({i, "date order",
                                     "dates not ascending at rows " + std::to_string(i - 1) +
                                         " and " + std::to_string(i)});
        } else {
            const long gap = core::days_between(prev, cur);
            if (gap > 10) {
                report.warnings.push_back({i, "calendar gap",
                                           std::to_string(gap) + "-day gap between " +
                                               prev.to_string() + " and " + cur.to_string()});
            }
        }
    }
    return report;
}

void write_ohlcv_csv(const OhlcvSeries& series, const std::string& path) {
    std::string out = "date,open,high,low,close,volume\n";
    for (const Bar& bar : series.bars) {
        out += bar.date.to_string();
        for (double v : {bar.open, bar.high, bar.low, bar.close, bar.volume}) {
            out += ',';
            out += core::format_double(v);
        }
        out += '\n';
    }
    core::write_text_file(path, out);
}

}  // namespace seqcast
