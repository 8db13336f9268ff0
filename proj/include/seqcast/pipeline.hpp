#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seqcast/indicators.hpp"

namespace seqcast {

/// Per-column min/max fitted on the training split only; applying it to test
/// rows may legitimately produce values outside [0,1].
struct Scaler {
    struct ColumnRange {
        std::string name;
        double min = 0.0;
        double max = 0.0;
        bool constant = false;  // max == min on the training split
    };
    std::vector<ColumnRange> columns;

    const ColumnRange& find(const std::string& name) const;
};

struct WindowSpec {
    std::size_t seq_len = 10;
    std::size_t horizon = 1;  // fixed at 1 throughout the toolkit
};

/// One training/evaluation sample: seq_len rows of every feature (row-major,
/// oldest first — row k is lag seq_len-k) and the next day's target value.
struct WindowSample {
    std::vector<double> inputs;  // seq_len * n_features
    double target = 0.0;
    core::Date target_date;
};

struct WindowedDataset {
    std::vector<WindowSample> samples;
    std::vector<std::string> feature_names;
    std::size_t seq_len = 0;
    std::string target_column;
    bool normalized = false;

    std::size_t n_features() const { return feature_names.size(); }
};

/// First floor(n * train_fraction) rows vs. the rest, order preserved.
/// Throws when either side would be empty.
std::pair<FeatureTable, FeatureTable> chronological_split(const FeatureTable& table,
                                                          double train_fraction = 0.8);

Scaler fit_minmax(const FeatureTable& train);

/// x' = (x - min)/(max - min); constant columns map to 0. The result is
/// marked normalized, and make_windows carries that mark into its dataset.
FeatureTable apply_minmax(const Scaler& scaler, const FeatureTable& table);

/// Exact algebraic inverse for non-constant columns; a constant column
/// recovers its training value.
std::vector<double> invert_minmax(const Scaler& scaler, const std::string& column,
                                  const std::vector<double>& values);

/// One sample per target row t in [seq_len, n-1]; inputs are rows
/// [t-seq_len, t-1]. Throws when the table has no room for a single window.
WindowedDataset make_windows(const FeatureTable& table, const WindowSpec& spec);

/// Fisher-Yates permutation driven by the toolkit's seeded generator.
/// Applied to the training set exactly once, never to test sets.
WindowedDataset shuffle_once(const WindowedDataset& dataset, std::uint64_t seed);

}  // namespace seqcast
