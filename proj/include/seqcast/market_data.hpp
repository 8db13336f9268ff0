#pragma once

#include <string>
#include <vector>

#include "seqcast/core/date.hpp"

namespace seqcast {

/// One daily OHLCV bar.
struct Bar {
    core::Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

/// Chronologically ordered daily bars for one instrument. Gaps between
/// consecutive dates are legal (non-trading days are absent from source
/// files); duplicates are not.
struct OhlcvSeries {
    std::string symbol;
    std::vector<Bar> bars;
};

struct Finding {
    std::size_t row = 0;  // bar index within the series (or file row for parse findings)
    std::string rule;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> errors;
    std::vector<Finding> warnings;
    bool ok() const { return errors.empty(); }
};

struct ParsedCsv {
    OhlcvSeries series;
    ValidationReport report;
};

/// Parses `date,open,high,low,close,volume` CSV, collecting every structural
/// problem (bad header, unparseable fields, duplicate dates) as report
/// entries instead of throwing. Rows that fail to parse are omitted from the
/// series; surviving bars are sorted ascending by date.
ParsedCsv parse_ohlcv_csv_lenient(const std::string& path, const std::string& symbol);

/// Strict variant: throws std::runtime_error carrying the first finding when
/// the file has structural problems or any bar violates its invariants.
OhlcvSeries parse_ohlcv_csv(const std::string& path, const std::string& symbol);

/// Checks every Bar and series invariant, reporting violations as data.
/// A calendar gap of more than 10 days between consecutive bars is a warning,
/// not an error.
ValidationReport validate_series(const OhlcvSeries& series);

/// Writes the canonical CSV schema with full round-trip precision.
void write_ohlcv_csv(const OhlcvSeries& series, const std::string& path);

}  // namespace seqcast
