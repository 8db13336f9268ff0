#pragma once

// Synthetic data builders and scratch-directory scaffolding shared by the
// test suites and the acceptance binary.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include "seqcast/core/date.hpp"
#include "seqcast/core/rng.hpp"
#include "seqcast/market_data.hpp"

namespace testsupport {

/// close = 10 + 0.01*t + sin(2*pi*t/20) + sigma*noise, consecutive calendar
/// days, OHLC consistent with the closes (open = previous close).
inline seqcast::OhlcvSeries trend_sine_series(std::size_t n, std::uint64_t seed = 7,
                                              double noise_sigma = 0.05,
                                              const std::string& symbol = "SYN") {
    seqcast::core::Rng rng(seed);
    seqcast::OhlcvSeries series;
    series.symbol = symbol;
    series.bars.reserve(n);
    seqcast::core::Date date{2015, 1, 2};
    const double two_pi = 2.0 * 3.14159265358979323846;
    double prev_close = 10.0;
    for (std::size_t t = 0; t < n; ++t) {
        seqcast::Bar bar;
        bar.date = date;
        const double tt = static_cast<double>(t);
        bar.close = 10.0 + 0.01 * tt + std::sin(two_pi * tt / 20.0) + noise_sigma * rng.normal();
        bar.open = (t == 0) ? bar.close : prev_close;
        bar.high = std::max(bar.open, bar.close) + 0.02 * (1.0 + rng.uniform01());
        bar.low = std::min(bar.open, bar.close) - 0.02 * (1.0 + rng.uniform01());
        bar.volume = 1.0e5 * (1.0 + 0.3 * rng.uniform01());
        prev_close = bar.close;
        series.bars.push_back(bar);
        date = seqcast::core::add_days(date, 1);
    }
    return series;
}

/// Positive random walk for indicator fuzzing; reflects away from zero.
inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double start = 100.0) {
    seqcast::core::Rng rng(seed);
    std::vector<double> out(n);
    double x = start;
    for (std::size_t i = 0; i < n; ++i) {
        x += rng.normal();
        if (x < 5.0) x = 10.0 - x;
        out[i] = x;
    }
    return out;
}

/// OHLCV bars riding a random walk (for ATR/Ichimoku-style inputs).
inline seqcast::OhlcvSeries random_walk_series(std::size_t n, std::uint64_t seed,
                                               const std::string& symbol = "RWK") {
    const std::vector<double> close = random_walk(n, seed);
    seqcast::core::Rng rng(seed ^ 0xABCDEF);
    seqcast::OhlcvSeries series;
    series.symbol = symbol;
    series.bars.reserve(n);
    seqcast::core::Date date{2012, 3, 1};
    for (std::size_t i = 0; i < n; ++i) {
        seqcast::Bar bar;
        bar.date = date;
        bar.close = close[i];
        bar.open = (i == 0) ? close[i] : close[i - 1];
        bar.high = std::max(bar.open, bar.close) + std::fabs(rng.normal());
        bar.low = std::max(0.5, std::min(bar.open, bar.close) - std::fabs(rng.normal()));
        bar.volume = 5.0e4 * (1.0 + rng.uniform01());
        series.bars.push_back(bar);
        date = seqcast::core::add_days(date, 1);
    }
    return series;
}

/// Unique scratch directory, removed (recursively) on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned long long> counter{0};
        const auto stamp =
            std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("seqcast_" + tag + "_" + std::to_string(stamp) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& rel = "") const {
        return rel.empty() ? path_.string() : (path_ / rel).string();
    }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
