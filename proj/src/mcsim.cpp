#include "transient/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "transient/approx.hpp"
#include "transient/errors.hpp"
#include "transient/parallel.hpp"
#include "transient/rng.hpp"

namespace transient::mcsim {

namespace {

using charts::ChartId;

constexpr std::size_t kChunk = 2048;

efam::Sampler null_sampler(const Scenario& s) {
    if (charts::is_two_param_chart(s.chart.chart)) return efam::Sampler(efam::NormalParams{0.0, 1.0});
    return efam::Sampler(s.chart.model, 0.0);
}

efam::Sampler signal_sampler(const Scenario& s) {
    switch (s.signal.kind) {
    case Signal::Kind::none: return null_sampler(s);
    case Signal::Kind::canonical: return efam::Sampler(s.chart.model, s.signal.theta);
    case Signal::Kind::normal: return efam::Sampler(s.signal.normal);
    }
    return null_sampler(s);
}

// Runs kernel(chart, rng, null, alt, r) for every replication, chunked over workers.
template <class Kernel>
void for_each_replication(const Scenario& s, Kernel&& kernel) {
    const efam::Sampler null = null_sampler(s);
    const efam::Sampler alt = signal_sampler(s);
    const std::size_t chunks = (s.replications + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t k) {
        charts::Chart chart(s.chart);
        const std::size_t end = std::min(s.replications, (k + 1) * kChunk);
        for (std::size_t r = k * kChunk; r < end; ++r) {
            Rng rng = substream(s.seed, r);
            chart.reset();
            for (std::size_t i = 0; i < s.chart.capacity(); ++i) chart.observe(null(rng));
            kernel(chart, rng, alt, r);
        }
    });
}

double solve_decreasing(const std::function<double(double)>& f, double target, double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Threshold at which the analytic FDP equals the target, when one exists.
std::optional<double> analytic_threshold(const Scenario& s, double target) {
    approx::ApproxInputs in;
    in.model = s.chart.model;
    in.w = s.chart.w;
    in.L = s.L;
    std::function<double(double)> f;
    double lo = 0.5, hi = 10.0;
    switch (s.chart.chart) {
    case ChartId::ma:
        if (efam::describe(s.chart.model).dim != 1) return std::nullopt;
        f = [&](double b) { in.threshold = b; return approx::fdp_ma(in).simplified; };
        break;
    case ChartId::rstar_1p:
    case ChartId::rstar_var_unknown_mean:
    case ChartId::rstar_mean_unknown_var:
        in.model = efam::ModelId::normal_mean;
        f = [&](double b) { in.threshold = b; return approx::fdp_rstar(in).simplified; };
        break;
    case ChartId::bartlett_w2:
        lo = 2.5;
        hi = 60.0;
        f = [&](double b2) { in.threshold = b2; return approx::fdp_bartlett(in).simplified; };
        break;
    default: return std::nullopt;
    }
    try {
        if (!(f(lo) > target && f(hi) < target)) return std::nullopt;
        return solve_decreasing(f, target, lo, hi);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

double fdp_on(const std::vector<double>& sorted, double b) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), b);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

} // namespace

void Scenario::validate() const {
    chart.validate();
    if (replications < 1) throw std::invalid_argument("scenario needs at least one replication");
    if (L < 1) throw std::invalid_argument("scenario needs L >= 1");
    const bool two = charts::is_two_param_chart(chart.chart);
    if (signal.kind == Signal::Kind::canonical && two) {
        throw std::invalid_argument("two-parameter charts take a (mean, variance) signal");
    }
    if (signal.kind == Signal::Kind::normal && !two) {
        throw std::invalid_argument("one-parameter charts take a canonical signal");
    }
    (void)signal_sampler(*this);
}

ProbabilityEstimate ProbabilityEstimate::from_counts(std::size_t hits, std::size_t n) {
    if (n == 0 || hits > n) throw std::invalid_argument("invalid probability counts");
    ProbabilityEstimate p;
    p.replications = n;
    p.p_hat = static_cast<double>(hits) / static_cast<double>(n);
    p.std_error = std::sqrt(p.p_hat * (1.0 - p.p_hat) / static_cast<double>(n));
    return p;
}

ProbabilityEstimate run_scenario(const Scenario& s) {
    s.validate();
    const std::size_t chunks = (s.replications + kChunk - 1) / kChunk;
    std::vector<std::size_t> hits(chunks, 0);
    for_each_replication(s, [&](charts::Chart& chart, Rng& rng, const efam::Sampler& alt, std::size_t r) {
        for (std::size_t t = 0; t < s.L; ++t) {
            if (chart.step(alt(rng)).alarm) {
                ++hits[r / kChunk];
                return;
            }
        }
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;
    return ProbabilityEstimate::from_counts(total, s.replications);
}

std::vector<double> replicate_maxima(const Scenario& s) {
    s.validate();
    std::vector<double> out(s.replications);
    const bool two_sided = s.chart.two_sided;
    for_each_replication(s, [&](charts::Chart& chart, Rng& rng, const efam::Sampler& alt, std::size_t r) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < s.L; ++t) {
            const double v = chart.step(alt(rng)).statistic;
            m = std::max(m, two_sided ? std::abs(v) : v);
        }
        out[r] = m;
    });
    return out;
}

std::pair<double, double> initial_bracket(const Scenario& s, double target_fdp) {
    if (const auto b0 = analytic_threshold(s, target_fdp)) {
        const double half = s.chart.chart == ChartId::bartlett_w2 ? 3.0 : 0.75;
        return {std::max(1e-3, *b0 - half), *b0 + half};
    }
    const double root = std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(s.L, 3))));
    return {0.5 * root, 10.0 * root};
}

CalibrationResult calibrate_threshold(Scenario s, double target_fdp, double tol) {
    if (!(target_fdp > 0.0 && target_fdp < 0.5)) throw std::invalid_argument("target FDP must lie in (0, 0.5)");
    if (!(tol > 0.0)) throw std::invalid_argument("calibration tolerance must be positive");
    s.signal = Signal::null();
    auto maxima = replicate_maxima(s);
    std::sort(maxima.begin(), maxima.end());
    const double n = static_cast<double>(maxima.size());
    const double se = std::sqrt(target_fdp * (1.0 - target_fdp) / n);
    const double accept = std::max(tol, 2.0 * se);

    auto [lo, hi] = initial_bracket(s, target_fdp);
    if (!(fdp_on(maxima, lo) >= target_fdp && fdp_on(maxima, hi) <= target_fdp)) {
        const double root = std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(s.L, 3))));
        lo = 0.5 * root;
        hi = 10.0 * root;
        if (s.chart.chart == ChartId::bartlett_w2) hi *= hi;
        if (!(fdp_on(maxima, lo) >= target_fdp && fdp_on(maxima, hi) <= target_fdp)) {
            throw CalibrationError("calibrate_threshold: target FDP is not bracketed");
        }
    }
    std::size_t it = 0;
    while (it < 60 && hi - lo > 1e-4 * std::max(1.0, hi)) {
        ++it;
        const double mid = 0.5 * (lo + hi);
        (fdp_on(maxima, mid) > target_fdp ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    const double p = fdp_on(maxima, b);
    if (std::abs(p - target_fdp) > accept) {
        throw CalibrationError("calibrate_threshold: estimated FDP " + std::to_string(p) +
                               " outside the tolerance after " + std::to_string(it) + " bisection steps");
    }
    const std::size_t hits = static_cast<std::size_t>(std::llround(p * n));
    return {b, ProbabilityEstimate::from_counts(hits, maxima.size()), it};
}

} // namespace transient::mcsim
