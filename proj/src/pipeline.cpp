#include "seqcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqcast/core/rng.hpp"

namespace seqcast {

const Scaler::ColumnRange& Scaler::find(const std::string& name) const {
    for (const auto& c : columns) {
        if (c.name == name) return c;
    }
    throw std::invalid_argument("scaler knows no column '" + name + "'");
}

std::pair<FeatureTable, FeatureTable> chronological_split(const FeatureTable& table,
                                                          double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0,1), got " +
                                    std::to_string(train_fraction));
    }
    const std::size_t n = table.n_rows();
    const std::size_t cut = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * train_fraction));
    if (cut == 0 || cut >= n) {
        throw std::invalid_argument("split of " + std::to_string(n) + " rows at fraction " +
                                    std::to_string(train_fraction) + " leaves an empty side");
    }

    auto take = [&](std::size_t begin, std::size_t end) {
        FeatureTable part;
        part.symbol = table.symbol;
        part.target_column = table.target_column;
        part.normalized = table.normalized;
        part.column_names = table.column_names;
        part.dates.assign(table.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                          table.dates.begin() + static_cast<std::ptrdiff_t>(end));
        part.columns.reserve(table.columns.size());
        for (const auto& col : table.columns) {
            part.columns.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(begin),
                                      col.begin() + static_cast<std::ptrdiff_t>(end));
        }
        return part;
    };
    return {take(0, cut), take(cut, n)};
}

Scaler fit_minmax(const FeatureTable& train) {
    if (train.n_rows() == 0) throw std::invalid_argument("cannot fit scaler on an empty table");
    Scaler scaler;
    scaler.columns.reserve(train.n_cols());
    for (std::size_t c = 0; c < train.n_cols(); ++c) {
        const auto& col = train.columns[c];
        Scaler::ColumnRange range;
        range.name = train.column_names[c];
        range.min = *std::min_element(col.begin(), col.end());
        range.max = *std::max_element(col.begin(), col.end());
        range.constant = range.max == range.min;
        scaler.columns.push_back(std::move(range));
    }
    return scaler;
}

FeatureTable apply_minmax(const Scaler& scaler, const FeatureTable& table) {
    FeatureTable out = table;
    out.normalized = true;
    for (std::size_t c = 0; c < out.n_cols(); ++c) {
        const auto& range = scaler.find(out.column_names[c]);
        auto& col = out.columns[c];
        if (range.constant) {
            std::fill(col.begin(), col.end(), 0.0);
        } else {
            const double span = range.max - range.min;
            for (double& v : col) v = (v - range.min) / span;
        }
    }
    return out;
}

std::vector<double> invert_minmax(const Scaler& scaler, const std::string& column,
                                  const std::vector<double>& values) {
    const auto& range = scaler.find(column);
    std::vector<double> out(values.size());
    if (range.constant) {
        std::fill(out.begin(), out.end(), range.min);
        return out;
    }
    const double span = range.max - range.min;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * span + range.min;
    return out;
}

WindowedDataset make_windows(const FeatureTable& table, const WindowSpec& spec) {
    if (spec.seq_len == 0) throw std::invalid_argument("seq_len must be >= 1");
    if (spec.horizon != 1) throw std::invalid_argument("only horizon 1 is supported");
    const std::size_t n = table.n_rows();
    if (n <= spec.seq_len) {
        throw std::invalid_argument("table of " + std::to_string(n) +
                                    " rows cannot window at seq_len " + std::to_string(spec.seq_len));
    }
    WindowedDataset ds;
    ds.feature_names = table.column_names;
    ds.seq_len = spec.seq_len;
    ds.target_column = table.target_column;
    ds.normalized = table.normalized;
    const std::size_t n_features = table.n_cols();
    const auto& target = table.column(table.target_column);

    ds.samples.resize(n - spec.seq_len);
    for (std::size_t t = spec.seq_len; t < n; ++t) {
        WindowSample& s = ds.samples[t - spec.seq_len];
        s.inputs.resize(spec.seq_len * n_features);
        for (std::size_t k = 0; k < spec.seq_len; ++k) {
            const std::size_t row = t - spec.seq_len + k;
            for (std::size_t c = 0; c < n_features; ++c) {
                s.inputs[k * n_features + c] = table.columns[c][row];
            }
        }
        s.target = target[t];
        s.target_date = table.dates[t];
    }
    return ds;
}

WindowedDataset shuffle_once(const WindowedDataset& dataset, std::uint64_t seed) {
    if (dataset.samples.empty()) throw std::invalid_argument("cannot shuffle an empty dataset");
    WindowedDataset out = dataset;
    core::Rng rng(seed);
    // Fisher-Yates, high index down; identical permutation on every platform
    for (std::size_t i = out.samples.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
        std::swap(out.samples[i], out.samples[j]);
    }
    return out;
}

}  // namespace seqcast
