#include "transient/charts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "transient/errors.hpp"

namespace transient::charts {

namespace {

constexpr double kGuard = 1e-8;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<std::pair<ChartId, std::string_view>, 15> kChartNames{{
    {ChartId::ma, "ma"},
    {ChartId::gma, "gma"},
    {ChartId::rstar_1p, "rstar_1p"},
    {ChartId::r_1p, "r_1p"},
    {ChartId::cusum_w, "cusum_w"},
    {ChartId::sr_w, "sr_w"},
    {ChartId::rstar_var_unknown_mean, "rstar_var_unknown_mean"},
    {ChartId::r_var_unknown_mean, "r_var_unknown_mean"},
    {ChartId::wald_var_unknown_mean, "wald_var_unknown_mean"},
    {ChartId::rstar_mean_unknown_var, "rstar_mean_unknown_var"},
    {ChartId::r_mean_unknown_var, "r_mean_unknown_var"},
    {ChartId::tstat, "tstat"},
    {ChartId::cusum_profile, "cusum_profile"},
    {ChartId::sr_profile, "sr_profile"},
    {ChartId::bartlett_w2, "bartlett_w2"},
}};

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Running sums carry rounding error of order eps * sum_sq_peak(), so windows
// whose spread is within that noise are recomputed with two passes.
efam::TwoParamMle window_mle(const WindowState& win) {
    const std::size_t n = win.size();
    const double nd = static_cast<double>(n);
    const double mean = win.sum() / nd;
    const double second = win.sum_sq() / nd;
    if (nd * (second - mean * mean) > 1e-9 * win.sum_sq_peak()) return efam::mle_two_param(win.sum(), win.sum_sq(), n);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += win.recent(k);
    const double m = s / nd;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) ss += (win.recent(k) - m) * (win.recent(k) - m);
    return efam::mle_two_param(s, ss + nd * m * m, n);
}

double window_variance(const WindowState& win) { return window_mle(win).variance; }

} // namespace

bool is_signed_chart(ChartId id) {
    switch (id) {
    case ChartId::cusum_w:
    case ChartId::sr_w:
    case ChartId::cusum_profile:
    case ChartId::sr_profile:
    case ChartId::bartlett_w2:
        return false;
    default:
        return true;
    }
}

std::string_view to_string(ChartId id) {
    for (const auto& [k, name] : kChartNames) {
        if (k == id) return name;
    }
    return "unknown";
}

ChartId chart_from_string(std::string_view name) {
    for (const auto& [k, n] : kChartNames) {
        if (n == name) return k;
    }
    throw std::invalid_argument("unknown chart: " + std::string(name));
}

std::string_view to_string(ProfileKind k) {
    return k == ProfileKind::variance_unknown_mean ? "variance_unknown_mean" : "mean_unknown_variance";
}

ProfileKind profile_kind_from_string(std::string_view name) {
    if (name == "variance_unknown_mean") return ProfileKind::variance_unknown_mean;
    if (name == "mean_unknown_variance") return ProfileKind::mean_unknown_variance;
    throw std::invalid_argument("unknown profile kind: " + std::string(name));
}

std::string_view to_string(ProfileEstimate e) { return e == ProfileEstimate::per_k ? "per_k" : "whole_window"; }

ProfileEstimate profile_estimate_from_string(std::string_view name) {
    if (name == "whole_window") return ProfileEstimate::whole_window;
    if (name == "per_k") return ProfileEstimate::per_k;
    throw std::invalid_argument("unknown profile estimate: " + std::string(name));
}

bool is_two_param_chart(ChartId id) {
    switch (id) {
    case ChartId::rstar_var_unknown_mean:
    case ChartId::r_var_unknown_mean:
    case ChartId::wald_var_unknown_mean:
    case ChartId::rstar_mean_unknown_var:
    case ChartId::r_mean_unknown_var:
    case ChartId::tstat:
    case ChartId::cusum_profile:
    case ChartId::sr_profile:
    case ChartId::bartlett_w2:
        return true;
    default:
        return false;
    }
}

void ChartConfig::validate() const {
    if (w == 0) throw std::invalid_argument("window length must be positive");
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
        throw std::invalid_argument("threshold must be strictly positive");
    }
    if (chart == ChartId::gma && (w0 == 0 || w0 > w1)) {
        throw std::invalid_argument("gma requires 1 <= w0 <= w1");
    }
    if (!is_two_param_chart(chart) && efam::describe(model).dim != 1) {
        throw std::invalid_argument(std::string(to_string(chart)) + " requires a one-parameter model");
    }
    if (chart == ChartId::cusum_w || chart == ChartId::sr_w) {
        if (!(delta > 0.0)) throw std::invalid_argument("reference signal delta must be positive");
        if (!efam::describe(model).domain[0].contains(delta)) {
            throw DomainError("reference signal delta outside the model domain");
        }
    }
    if (chart == ChartId::cusum_profile || chart == ChartId::sr_profile) {
        if (profile_kind == ProfileKind::variance_unknown_mean) {
            if (!(sigma0_sq > 0.0) || !(sigma1_sq > 0.0)) {
                throw std::invalid_argument("profile variances must be positive");
            }
            if (sigma0_sq == sigma1_sq) {
                throw std::invalid_argument("profile variances must differ");
            }
        } else if (!(delta > 0.0)) {
            throw std::invalid_argument("reference mean delta must be positive");
        }
    }
    if (two_sided && !is_signed_chart(chart)) {
        throw std::invalid_argument(std::string(to_string(chart)) + " has no two-sided form");
    }
}

std::size_t ChartConfig::capacity() const { return chart == ChartId::gma ? w1 : w; }

double adjusted_signed_lr(double r, double u) {
    if (std::abs(r) < kGuard) return 0.0;
    return r + std::log(u / r) / r;
}

double max_or_logsumexp(const std::vector<double>& values, bool lse) {
    if (values.empty()) throw std::invalid_argument("max_or_logsumexp: empty input");
    const double m = *std::max_element(values.begin(), values.end());
    if (!lse || !std::isfinite(m)) return m;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - m);
    return m + std::log(acc);
}

double signed_lr_from_mean(efam::ModelId model, double xbar, std::size_t w) {
    const double psi_hat = std::max(efam::conjugate(model, xbar), 0.0);
    return sgn(xbar) * std::sqrt(2.0 * static_cast<double>(w) * psi_hat);
}

double wald_u_from_mean(efam::ModelId model, double xbar, std::size_t w) {
    const double th = efam::solve_theta_for_mean(model, xbar);
    return th * std::sqrt(static_cast<double>(w) * efam::cumulant_d2(model, th));
}

double rstar_from_mean(efam::ModelId model, double xbar, std::size_t w) {
    const double r = signed_lr_from_mean(model, xbar, w);
    if (std::abs(r) < kGuard) return 0.0;
    return adjusted_signed_lr(r, wald_u_from_mean(model, xbar, w));
}

double signed_lr_variance(double s2, std::size_t w) {
    if (!(s2 > 0.0)) throw DegenerateWindowError("window variance must be positive");
    const double d = s2 - 1.0;
    const double dev = std::max(d - std::log1p(d), 0.0);
    return sgn(d) * std::sqrt(static_cast<double>(w) * dev);
}

double wald_variance(double s2, std::size_t w) {
    if (!(s2 > 0.0)) throw DegenerateWindowError("window variance must be positive");
    return std::sqrt(static_cast<double>(w) / 2.0) * (s2 - 1.0);
}

double rstar_variance(double s2, std::size_t w) {
    const double r = signed_lr_variance(s2, w);
    if (std::abs(r) < kGuard) return 0.0;
    return adjusted_signed_lr(r, wald_variance(s2, w) * std::sqrt(s2));
}

double signed_lr_mean(double xbar, double s2, std::size_t w) {
    if (!(s2 > 0.0)) throw DegenerateWindowError("window variance must be positive");
    return sgn(xbar) * std::sqrt(static_cast<double>(w) * std::log1p(xbar * xbar / s2));
}

double rstar_mean(double xbar, double s2, std::size_t w) {
    const double r = signed_lr_mean(xbar, s2, w);
    if (std::abs(r) < kGuard) return 0.0;
    const double u = std::sqrt(static_cast<double>(w)) * xbar * std::sqrt(s2) / (s2 + xbar * xbar);
    return adjusted_signed_lr(r, u);
}

double tstat_mean(double xbar, double s2, std::size_t w) {
    if (!(s2 > 0.0)) throw DegenerateWindowError("window variance must be positive");
    return std::sqrt(static_cast<double>(w)) * xbar / std::sqrt(s2);
}

double bartlett_w2(double xbar, double s2, std::size_t w) {
    if (!(s2 > 0.0)) throw DegenerateWindowError("window variance must be positive");
    const double wd = static_cast<double>(w);
    const double d = s2 - 1.0;
    const double lr = wd * (xbar * xbar + d - std::log1p(d));
    return lr / (1.0 + 3.0 / (4.0 * wd));
}

Chart::Chart(ChartConfig config) : config_(std::move(config)), window_((config_.validate(), config_.capacity())) {
    if (config_.chart == ChartId::cusum_w || config_.chart == ChartId::sr_w) {
        ref_c_ = efam::cumulant(config_.model, config_.delta);
    }
    scratch_.reserve(config_.capacity());
}

ChartStep Chart::step(double x) {
    window_.push(x);
    ChartStep out;
    out.t = window_.count();
    if (!window_.full()) {
        out.statistic = kNaN;
        return out;
    }
    out.ready = true;
    out.statistic = statistic();
    const double b = config_.threshold;
    if (out.statistic > b) {
        out.alarm = true;
        out.direction = Direction::up;
    } else if (config_.two_sided && out.statistic < -b) {
        out.alarm = true;
        out.direction = Direction::down;
    }
    return out;
}

double Chart::suffix_max_or_lse(bool lse) const {
    const std::size_t w = config_.w;
    scratch_.resize(w);
    const ChartId id = config_.chart;

    if (id == ChartId::cusum_w || id == ChartId::sr_w) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w; ++k) {
            acc += config_.delta * window_.recent(k) - ref_c_;
            scratch_[k] = acc;
        }
        return max_or_logsumexp(scratch_, lse);
    }

    const bool per_k = config_.profile_estimate == ProfileEstimate::per_k;
    if (config_.profile_kind == ProfileKind::variance_unknown_mean) {
        const double a = 1.0 / config_.sigma0_sq - 1.0 / config_.sigma1_sq;
        const double lratio = std::log(config_.sigma0_sq / config_.sigma1_sq);
        const double xbar = window_mle(window_).mean;
        double sx = 0.0;
        double sxx = 0.0;
        for (std::size_t k = 0; k < w; ++k) {
            const double x = window_.recent(k);
            const double kd = static_cast<double>(k + 1);
            double ss;
            if (per_k) {
                sx += x;
                sxx += x * x;
                ss = std::max(sxx - sx * sx / kd, 0.0);
            } else {
                sxx += (x - xbar) * (x - xbar);
                ss = sxx;
            }
            scratch_[k] = 0.5 * (a * ss + kd * lratio);
        }
        return max_or_logsumexp(scratch_, lse);
    }

    const double delta = config_.delta;
    if (per_k) {
        double s0 = 0.0;
        double s1 = 0.0;
        for (std::size_t k = 0; k < w; ++k) {
            const double x = window_.recent(k);
            s0 += x * x;
            s1 += (x - delta) * (x - delta);
            scratch_[k] = 0.5 * static_cast<double>(k + 1) * std::log(s0 / s1);
        }
        return max_or_logsumexp(scratch_, lse);
    }
    const double s2 = window_variance(window_);
    double acc = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
        acc += (delta * window_.recent(k) - 0.5 * delta * delta) / s2;
        scratch_[k] = acc;
    }
    return max_or_logsumexp(scratch_, lse);
}

double Chart::statistic() const {
    if (!window_.full()) throw std::logic_error("chart statistic requested before the window is full");
    const std::size_t w = config_.w;
    const double wd = static_cast<double>(w);

    switch (config_.chart) {
    case ChartId::ma:
        return std::sqrt(wd) * window_.mean();
    case ChartId::gma: {
        double acc = 0.0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < config_.w1; ++k) {
            acc += window_.recent(k);
            const std::size_t len = k + 1;
            if (len >= config_.w0) best = std::max(best, acc / std::sqrt(static_cast<double>(len)));
        }
        return best;
    }
    case ChartId::rstar_1p:
        return rstar_from_mean(config_.model, window_.mean(), w);
    case ChartId::r_1p:
        return signed_lr_from_mean(config_.model, window_.mean(), w);
    case ChartId::cusum_w:
    case ChartId::cusum_profile:
        return suffix_max_or_lse(false);
    case ChartId::sr_w:
    case ChartId::sr_profile:
        return suffix_max_or_lse(true);
    default:
        break;
    }

    const auto mle = window_mle(window_);
    switch (config_.chart) {
    case ChartId::rstar_var_unknown_mean:
        return rstar_variance(mle.variance, w);
    case ChartId::r_var_unknown_mean:
        return signed_lr_variance(mle.variance, w);
    case ChartId::wald_var_unknown_mean:
        return wald_variance(mle.variance, w);
    case ChartId::rstar_mean_unknown_var:
        return rstar_mean(mle.mean, mle.variance, w);
    case ChartId::r_mean_unknown_var:
        return signed_lr_mean(mle.mean, mle.variance, w);
    case ChartId::tstat:
        return tstat_mean(mle.mean, mle.variance, w);
    case ChartId::bartlett_w2:
        return bartlett_w2(mle.mean, mle.variance, w);
    default:
        throw std::logic_error("unhandled chart id");
    }
}

} // namespace transient::charts
