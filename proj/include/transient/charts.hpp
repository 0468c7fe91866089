#pragma once

// Window-restricted detection charts. Each chart consumes one observation
// per step and emits its statistic once the window is full (t >= w).
//
// One-parameter charts read canonical observations (see efam::Sampler);
// the two-parameter normal charts read raw observations x and form
// t(x) = (x^2, x) internally.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transient/efam.hpp"
#include "transient/window.hpp"

namespace transient::charts {

enum class ChartId {
    ma,
    gma,
    rstar_1p,
    r_1p,                     // unadjusted signed likelihood ratio
    cusum_w,
    sr_w,
    rstar_var_unknown_mean,
    r_var_unknown_mean,
    wald_var_unknown_mean,
    rstar_mean_unknown_var,
    r_mean_unknown_var,
    tstat,
    cusum_profile,
    sr_profile,
    bartlett_w2,
};

std::string_view to_string(ChartId id);
ChartId chart_from_string(std::string_view name);

/// Which nuisance-profiled likelihood ratio the profile CUSUM / S-R use.
enum class ProfileKind {
    variance_unknown_mean,   // variance increase sigma0^2 -> sigma1^2, mean profiled out
    mean_unknown_variance,   // mean increase 0 -> delta, variance pooled
};

/// whole_window: nuisance estimated from the full window (default).
/// per_k: nuisance re-estimated on every suffix of length k.
enum class ProfileEstimate { whole_window, per_k };

std::string_view to_string(ProfileKind k);
ProfileKind profile_kind_from_string(std::string_view name);
std::string_view to_string(ProfileEstimate e);
ProfileEstimate profile_estimate_from_string(std::string_view name);

enum class Direction { up, down };

struct ChartConfig {
    ChartId chart = ChartId::ma;
    efam::ModelId model = efam::ModelId::normal_mean;
    std::size_t w = 20;
    std::size_t w0 = 0;       // gma only
    std::size_t w1 = 0;       // gma only
    double threshold = 3.0;   // b, d, c, or b^2 depending on the chart
    /// Reference signal: canonical delta for cusum_w / sr_w, the changed mean
    /// for the mean_unknown_variance profile charts.
    double delta = 0.5;
    double sigma0_sq = 1.0;   // variance_unknown_mean profile charts
    double sigma1_sq = 2.0;
    ProfileKind profile_kind = ProfileKind::variance_unknown_mean;
    ProfileEstimate profile_estimate = ProfileEstimate::whole_window;
    bool two_sided = false;

    /// Throws std::invalid_argument / DomainError on inconsistent settings.
    void validate() const;
    /// Number of observations the chart needs before it emits a statistic.
    std::size_t capacity() const;

    bool operator==(const ChartConfig&) const = default;
};

/// True for charts that read raw normal observations (two-parameter model).
bool is_two_param_chart(ChartId id);
/// False for the charts that only monitor upward (CUSUM, S-R, Bartlett).
bool is_signed_chart(ChartId id);

struct ChartStep {
    std::size_t t = 0;           // 1-based index of the observation just consumed
    double statistic = 0.0;      // NaN while warming up
    bool ready = false;          // window full
    bool alarm = false;
    std::optional<Direction> direction;
};

class Chart {
public:
    explicit Chart(ChartConfig config);

    /// Consumes x and evaluates the statistic when the window is full.
    ChartStep step(double x);
    /// Consumes x without evaluating (window prefill).
    void observe(double x) { window_.push(x); }
    void reset() { window_.clear(); }

    bool ready() const { return window_.full(); }
    /// Current statistic; requires ready().
    double statistic() const;

    const ChartConfig& config() const { return config_; }
    const WindowState& window() const { return window_; }

private:
    double suffix_max_or_lse(bool lse) const;

    ChartConfig config_;
    WindowState window_;
    double ref_c_ = 0.0;                      // c(delta) for cusum_w / sr_w
    mutable std::vector<double> scratch_;
};

// Statistic kernels, exposed for direct use and testing.

/// R + log(U/R)/R, with the null-point guard |R| < 1e-8 -> 0.
double adjusted_signed_lr(double r, double u);
double max_or_logsumexp(const std::vector<double>& values, bool lse);

/// Signed likelihood ratio R of a one-parameter model at window mean xbar.
double signed_lr_from_mean(efam::ModelId model, double xbar, std::size_t w);
/// Wald-type U = theta_hat sqrt(w c''(theta_hat)).
double wald_u_from_mean(efam::ModelId model, double xbar, std::size_t w);
double rstar_from_mean(efam::ModelId model, double xbar, std::size_t w);

// Variance change with unknown mean; s2 is the window variance (divisor w).
double signed_lr_variance(double s2, std::size_t w);
double wald_variance(double s2, std::size_t w);
double rstar_variance(double s2, std::size_t w);

// Mean change with unknown variance.
double signed_lr_mean(double xbar, double s2, std::size_t w);
double rstar_mean(double xbar, double s2, std::size_t w);
double tstat_mean(double xbar, double s2, std::size_t w);

/// Bartlett-adjusted likelihood ratio for (mu, sigma^2) = (0, 1).
double bartlett_w2(double xbar, double s2, std::size_t w);

} // namespace transient::charts
