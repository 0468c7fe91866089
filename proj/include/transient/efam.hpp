#pragma once

// Exponential-family model catalog.
//
// Every one-parameter model is written on the canonical scale
// f_theta(x) = f_0(x) exp(theta x - c(theta)) with c(0) = c'(0) = 0 and
// c''(0) = 1, so the null stream is mean zero with unit variance. The
// two-parameter normal model keeps t(x) = (x^2, x) and its null point is
// theta_0 = (-1/2, 0), i.e. N(0, 1).

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "transient/rng.hpp"

namespace transient::efam {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ModelId { normal_mean, exp_rate, normal_variance, normal_two_param };

std::string_view to_string(ModelId id);
/// Throws std::invalid_argument for an unknown name.
ModelId model_from_string(std::string_view name);

struct Interval {
    double lo;
    double hi;
    constexpr bool contains(double x) const { return x > lo && x < hi; }
};

struct ModelDescriptor {
    ModelId id;
    int dim;                          // 1 or 2
    std::array<Interval, 2> domain;   // per coordinate; [1] unused when dim == 1
    double null_variance;             // c''(theta_0) of the monitored coordinate

    bool in_domain(const Vector& theta) const;
    Vector null_theta() const;
};

const ModelDescriptor& describe(ModelId id);

// One-parameter models. All throw DomainError outside the domain and
// std::invalid_argument when called with the two-parameter model.
double cumulant(ModelId id, double theta);
double cumulant_d1(ModelId id, double theta);
double cumulant_d2(ModelId id, double theta);

// Any model; theta has describe(id).dim entries.
double cumulant(ModelId id, const Vector& theta);
Vector cumulant_d1(ModelId id, const Vector& theta);
Matrix cumulant_d2(ModelId id, const Vector& theta);

/// theta with c'(theta) = m. Throws NoSolutionError when m is not attainable.
double solve_theta_for_mean(ModelId id, double m);

/// Legendre transform sup_theta {theta m - c(theta)}, i.e. the per-observation
/// log-likelihood ratio at the MLE when the window mean is m.
double conjugate(ModelId id, double m);

/// psi(theta) = theta c'(theta) - c(theta).
double psi(ModelId id, double theta);

/// Unique theta >= 0 with psi(theta) = target.
double solve_psi(ModelId id, double target);

/// Solves (theta_1 - theta01) c_1'(theta) - c(theta) + c(theta0) = target for
/// theta_1 > theta01 with the nuisance coordinate held at theta02.
Eigen::Vector2d solve_psi_scale(double theta01, double target, double theta02 = 0.0);

/// psi(theta, theta0) for the two-parameter model.
double psi_scale(const Eigen::Vector2d& theta, const Eigen::Vector2d& theta0);

struct NormalParams {
    double mean;
    double variance;

    bool operator==(const NormalParams&) const = default;
};

Eigen::Vector2d canonical_from_normal(NormalParams p);
NormalParams normal_from_canonical(const Eigen::Vector2d& theta);

/// Canonical parameter for a natural-scale signal: exp_rate takes the changed
/// mean 1/lambda (baseline 1), normal_variance the changed variance
/// (baseline 1), normal_mean the changed mean.
double theta_from_natural(ModelId id, double natural);

/// Draws canonical observations of a one-parameter model, or raw normal
/// observations for normal_two_param. Cheap to copy.
class Sampler {
public:
    /// One-parameter model at canonical parameter theta.
    Sampler(ModelId id, double theta);
    /// Raw N(mean, variance) observations.
    explicit Sampler(NormalParams p);

    double operator()(Rng& rng) const;

    ModelId model() const { return id_; }

private:
    ModelId id_;
    double a_ = 0.0;   // model-specific location/rate
    double b_ = 1.0;   // model-specific scale
};

struct CanonicalSample {
    Matrix values;        // n x dim sufficient statistics; (x^2, x) rows for p = 2
    Vector source_theta;
};

CanonicalSample sample_null(ModelId id, std::size_t n, std::uint64_t seed);
CanonicalSample sample_alt(ModelId id, const Vector& theta, std::size_t n, std::uint64_t seed);

struct TwoParamMle {
    double theta1;
    double theta2;
    double variance;   // divisor w
    double mean;
};

/// MLE of the two-parameter normal model from window sums.
/// Throws DegenerateWindowError when the window variance vanishes.
TwoParamMle mle_two_param(double sum_x, double sum_x2, std::size_t w);

} // namespace transient::efam
