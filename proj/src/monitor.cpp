#include "transient/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "transient/efam.hpp"
#include "transient/errors.hpp"
#include "transient/rng.hpp"

namespace transient::io {

namespace {

std::string where(const std::string& label, std::size_t t, const char* what) {
    return label + " at t=" + std::to_string(t) + ": " + what;
}

const char* direction_name(charts::Direction d) { return d == charts::Direction::up ? "up" : "down"; }

} // namespace

std::string format_number(double v, bool exact) {
    char buf[40];
    std::snprintf(buf, sizeof buf, exact ? "%.17g" : "%.6g", v);
    return buf;
}

MonitorReport monitor(const std::vector<double>& series, const std::vector<MonitorChart>& list) {
    if (list.empty()) throw std::invalid_argument("monitor needs at least one chart");
    MonitorReport rep;
    for (std::size_t c = 0; c < list.size(); ++c) {
        const auto& mc = list[c];
        const std::string label = mc.label.empty() ? std::string(charts::to_string(mc.config.chart)) : mc.label;
        rep.labels.push_back(label);
        mc.config.validate();
        if (series.size() <= mc.config.capacity()) {
            throw std::invalid_argument(label + ": series length " + std::to_string(series.size()) +
                                        " must exceed the window " + std::to_string(mc.config.capacity()));
        }
        charts::Chart chart(mc.config);
        Episode open;
        bool in_episode = false;
        const auto close = [&] {
            if (in_episode) rep.episodes.push_back(open);
            in_episode = false;
        };
        for (std::size_t i = 0; i < series.size(); ++i) {
            charts::ChartStep st;
            try {
                st = chart.step(series[i]);
            } catch (const DegenerateWindowError& e) {
                throw DegenerateWindowError(where(label, i + 1, e.what()));
            } catch (const DomainError& e) {
                throw DomainError(where(label, i + 1, e.what()));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(where(label, i + 1, e.what()));
            } catch (const std::exception& e) {
                throw std::runtime_error(where(label, i + 1, e.what()));
            }
            if (!st.ready) continue;
            MonitorRecord r;
            r.t = st.t;
            r.chart = c;
            r.statistic = st.statistic;
            r.alarm = st.alarm;
            if (st.direction) r.direction = *st.direction;
            rep.records.push_back(r);

            if (in_episode && (!r.alarm || r.direction != open.direction)) close();
            if (!r.alarm) continue;
            if (!in_episode) {
                open = Episode{c, r.t, r.t, r.direction, r.statistic};
                in_episode = true;
            } else {
                open.end = r.t;
                open.extremal = r.direction == charts::Direction::up ? std::max(open.extremal, r.statistic)
                                                                     : std::min(open.extremal, r.statistic);
            }
        }
        close();
    }
    return rep;
}

std::string plot_long(const MonitorReport& r, bool exact) {
    std::string out = "t,chart_id,statistic,alarm\n";
    for (const auto& rec : r.records) {
        out += std::to_string(rec.t) + "," + r.labels[rec.chart] + "," + format_number(rec.statistic, exact) + "," +
               (rec.alarm ? "1" : "0") + "\n";
    }
    return out;
}

std::string episodes_csv(const MonitorReport& r, bool exact) {
    std::string out = "chart_id,start,end,direction,extremal\n";
    for (const auto& e : r.episodes) {
        out += r.labels[e.chart] + "," + std::to_string(e.start) + "," + std::to_string(e.end) + "," +
               direction_name(e.direction) + "," + format_number(e.extremal, exact) + "\n";
    }
    return out;
}

std::vector<double> sample_acf(const std::vector<double>& x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n < 2 || max_lag >= n) throw std::invalid_argument("sample_acf needs max_lag < series length");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    if (!(c0 > 0.0)) throw std::invalid_argument("sample_acf of a constant series");
    std::vector<double> acf(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t i = k; i < n; ++i) ck += (x[i] - mean) * (x[i - k] - mean);
        acf[k - 1] = ck / c0;
    }
    return acf;
}

std::vector<double> synthetic_series(std::size_t n, std::uint64_t seed, const std::vector<PlantedEpisode>& planted) {
    const efam::Sampler z(efam::NormalParams{0.0, 1.0});
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = z(rng);
    for (const auto& p : planted) {
        if (p.start < 1 || p.start + p.length - 1 > n) throw std::invalid_argument("planted episode outside the series");
        if (!(p.variance_factor > 0.0)) throw std::invalid_argument("variance factor must be positive");
        const double sd = std::sqrt(p.variance_factor);
        for (std::size_t t = p.start; t < p.start + p.length; ++t) x[t - 1] = p.mean_shift + sd * x[t - 1];
    }
    return x;
}

} // namespace transient::io
