#pragma once

// Runs charts over a finished series and groups alarms into episodes.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "transient/charts.hpp"

namespace transient::io {

struct MonitorChart {
    std::string label;   // defaults to the chart id when empty
    charts::ChartConfig config;
};

struct MonitorRecord {
    std::size_t t = 0;   // 1-based series index
    std::size_t chart = 0;
    double statistic = 0.0;
    bool alarm = false;
    charts::Direction direction = charts::Direction::up;   // meaningful when alarm
};

struct Episode {
    std::size_t chart = 0;
    std::size_t start = 0;
    std::size_t end = 0;   // inclusive
    charts::Direction direction = charts::Direction::up;
    double extremal = 0.0;   // largest statistic (smallest for down episodes)
};

struct MonitorReport {
    std::vector<std::string> labels;
    std::vector<MonitorRecord> records;   // chart-major, t ascending
    std::vector<Episode> episodes;        // chart-major, start ascending
};

/// Statistics are recorded from t = w onward. Episodes are maximal runs of
/// consecutive alarms in one direction. Chart errors are rethrown with the
/// time index in the message.
MonitorReport monitor(const std::vector<double>& series, const std::vector<MonitorChart>& charts);

/// Long format: t,chart_id,statistic,alarm.
std::string plot_long(const MonitorReport& r, bool exact = false);
/// chart_id,start,end,direction,extremal.
std::string episodes_csv(const MonitorReport& r, bool exact = false);

/// Sample autocorrelation at lags 1..max_lag (biased estimator).
std::vector<double> sample_acf(const std::vector<double>& x, std::size_t max_lag);

struct PlantedEpisode {
    std::size_t start = 1;   // 1-based
    std::size_t length = 20;
    double mean_shift = 0.0;
    double variance_factor = 1.0;
};

/// N(0, 1) series of length n with the planted episodes applied.
std::vector<double> synthetic_series(std::size_t n, std::uint64_t seed, const std::vector<PlantedEpisode>& planted = {});

/// Formats with 6 significant digits, or round-trip precision when exact.
std::string format_number(double v, bool exact = false);

} // namespace transient::io
