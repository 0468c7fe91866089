#pragma once

// Analytic FDP / POD approximations and the overshoot constants they use.
//
// Every attenuation factor is written as nu_factor(scale) = exp(-rho * scale)
// with the scale spelled out per formula. rho_plus is always quoted for the
// symmetric-difference walk of a unit-variance statistic (the canonical
// one-parameter observations, or gamma't(x) for the p = 2 model).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transient/efam.hpp"

namespace transient::approx {

enum class Attenuation { exp_rho, none };

/// Which overshoot constant a formula uses when none is given explicitly.
/// normal_reference takes 0.824 for every model, which
/// reproduces the tabulated brackets; model_specific takes the catalog value.
enum class RhoConvention { normal_reference, model_specific };

inline constexpr double kNormalRho = 0.824;

struct OvershootEstimate {
    double rho_plus = 0.0;
    double std_error = 0.0;
    std::size_t replications = 0;
    std::size_t censored = 0;   // walks that hit the step cap before laddering
};

struct RhoOptions {
    std::size_t replications = 1000000;
    std::uint64_t seed = 20240611;
    std::size_t step_cap = 1000000;
    double max_censored_fraction = 0.01;
    std::size_t blocks = 100;   // jackknife blocks
};

/// Unit-variance-direction constant: 1.0 (exp_rate), 0.824 (normal_mean),
/// 1.167 (normal_variance); the p = 2 model returns the e1 direction value.
double catalog_rho(efam::ModelId id);

/// Simulates the symmetric-difference walk to its first positive ladder epoch
/// and returns E S^2 / (2 E S). For normal_two_param the increments are
/// projected on gamma = d / sqrt(d' Sigma d) with d = direction (default e1).
OvershootEstimate estimate_rho_plus(efam::ModelId id, const RhoOptions& opt = {},
                                    const efam::Vector& direction = {});

double nu_factor(double scale, double rho_plus, Attenuation policy = Attenuation::exp_rho);

struct LambdaEstimate {
    double lambda = 0.0;
    double std_error = 0.0;
    std::size_t replications = 0;
};

struct LambdaOptions {
    std::size_t replications = 100000;
    double barrier = 8.0;
    std::uint64_t seed = 777;
};

/// lambda(delta) = E exp(-(l_1(tau) - a)) for the walk of delta X - c(delta)
/// under f_delta stopped at the barrier a.
LambdaEstimate estimate_lambda(efam::ModelId id, double delta, const LambdaOptions& opt = {});
/// Default-option estimate, computed once per (model, delta).
double cached_lambda(efam::ModelId id, double delta);

struct ApproxInputs {
    efam::ModelId model = efam::ModelId::exp_rate;
    std::size_t w = 20;
    std::size_t L = 20;
    double threshold = 3.0;   // b, d, c, or b^2 for the Bartlett chart
    double delta = 0.5;       // reference for CUSUM/S-R, signal for POD
    std::size_t w0 = 0;       // gma only
    std::size_t w1 = 0;
    int p = 2;                // Bartlett degrees of freedom
    bool continuity_correction = false;
    Attenuation attenuation = Attenuation::exp_rho;
    RhoConvention rho_convention = RhoConvention::normal_reference;
    double rho_plus = 0.0;    // > 0 overrides the convention

    void validate() const;
};

/// rho_plus for `in`: the explicit value when positive, else per convention.
double resolve_rho(const ApproxInputs& in);

struct FdpForms {
    double full = 0.0;
    double simplified = 0.0;
};

FdpForms fdp_ma(const ApproxInputs& in);
/// Model-specific closed forms of the full MA approximation (exp_rate and
/// normal_variance only).
double fdp_ma_closed_form(const ApproxInputs& in);
FdpForms fdp_gma(const ApproxInputs& in);
FdpForms fdp_rstar(const ApproxInputs& in);
double fdp_cusum(const ApproxInputs& in);
double fdp_sr(const ApproxInputs& in);
FdpForms fdp_scale_multiparam(const ApproxInputs& in);
/// full is the first display of the Bartlett FDP theorem with theta along the
/// theta_1 coordinate; simplified is its small-theta form.
FdpForms fdp_bartlett(const ApproxInputs& in);

double pod_ma(const ApproxInputs& in);
double pod_rstar(const ApproxInputs& in);

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`; QuadratureError
/// when more than `max_intervals` subintervals would be needed.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                 std::size_t max_intervals = 10000);

/// Named formula dispatch for the command line: fdp_ma, fdp_ma_closed,
/// fdp_gma, fdp_rstar, fdp_cusum, fdp_sr, fdp_scale, fdp_bartlett, pod_ma,
/// pod_rstar. Returns (label, value) pairs.
std::vector<std::pair<std::string, double>> evaluate_formula(std::string_view name,
                                                             const ApproxInputs& in);
std::vector<std::string_view> formula_names();

} // namespace transient::approx
