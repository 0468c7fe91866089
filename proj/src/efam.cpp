#include "transient/efam.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "transient/cumulants.hpp"
#include "transient/errors.hpp"
#include "transient/roots.hpp"

namespace transient::efam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMargin = 1e-9;
const double kSqrt2 = std::sqrt(2.0);

using NM = closed_form::NormalMean<double>;
using ER = closed_form::ExpRate<double>;
using NV = closed_form::NormalVariance<double>;
using N2 = closed_form::NormalTwoParam<double>;

const ModelDescriptor kNormalMean{ModelId::normal_mean, 1, {{{-kInf, kInf}, {0, 0}}}, 1.0};
const ModelDescriptor kExpRate{ModelId::exp_rate, 1, {{{-kInf, 1.0 - kMargin}, {0, 0}}}, 1.0};
const ModelDescriptor kNormalVariance{
    ModelId::normal_variance, 1, {{{-kInf, (1.0 - kMargin) / std::sqrt(2.0)}, {0, 0}}}, 1.0};
const ModelDescriptor kNormalTwoParam{
    ModelId::normal_two_param, 2, {{{-kInf, -kMargin}, {-kInf, kInf}}}, 2.0};

void require_one_param(ModelId id) {
    if (id == ModelId::normal_two_param) {
        throw std::invalid_argument("operation requires a one-parameter model");
    }
}

void check_domain(ModelId id, double theta) {
    const auto& d = describe(id);
    if (!d.domain[0].contains(theta)) {
        throw DomainError(std::string(to_string(id)) + ": theta = " + std::to_string(theta) +
                          " outside the canonical domain");
    }
}

Eigen::Vector2d as2(ModelId id, const Vector& theta) {
    if (theta.size() != 2) throw std::invalid_argument("normal_two_param expects a 2-vector");
    if (!describe(id).in_domain(theta)) {
        throw DomainError("normal_two_param: theta_1 must be negative");
    }
    return Eigen::Vector2d(theta(0), theta(1));
}

} // namespace

std::string_view to_string(ModelId id) {
    switch (id) {
    case ModelId::normal_mean: return "normal_mean";
    case ModelId::exp_rate: return "exp_rate";
    case ModelId::normal_variance: return "normal_variance";
    case ModelId::normal_two_param: return "normal_two_param";
    }
    return "unknown";
}

ModelId model_from_string(std::string_view name) {
    for (auto id : {ModelId::normal_mean, ModelId::exp_rate, ModelId::normal_variance,
                    ModelId::normal_two_param}) {
        if (to_string(id) == name) return id;
    }
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

bool ModelDescriptor::in_domain(const Vector& theta) const {
    if (theta.size() != dim) return false;
    for (int i = 0; i < dim; ++i) {
        if (!domain[static_cast<std::size_t>(i)].contains(theta(i))) return false;
    }
    return true;
}

Vector ModelDescriptor::null_theta() const {
    if (dim == 1) return Vector::Zero(1);
    Vector t(2);
    t << -0.5, 0.0;
    return t;
}

const ModelDescriptor& describe(ModelId id) {
    switch (id) {
    case ModelId::normal_mean: return kNormalMean;
    case ModelId::exp_rate: return kExpRate;
    case ModelId::normal_variance: return kNormalVariance;
    case ModelId::normal_two_param: return kNormalTwoParam;
    }
    throw std::invalid_argument("unknown model id");
}

double cumulant(ModelId id, double theta) {
    require_one_param(id);
    check_domain(id, theta);
    switch (id) {
    case ModelId::normal_mean: return NM::c(theta);
    case ModelId::exp_rate: return ER::c(theta);
    default: return NV::c(theta);
    }
}

double cumulant_d1(ModelId id, double theta) {
    require_one_param(id);
    check_domain(id, theta);
    switch (id) {
    case ModelId::normal_mean: return NM::d1(theta);
    case ModelId::exp_rate: return ER::d1(theta);
    default: return NV::d1(theta);
    }
}

double cumulant_d2(ModelId id, double theta) {
    require_one_param(id);
    check_domain(id, theta);
    switch (id) {
    case ModelId::normal_mean: return NM::d2(theta);
    case ModelId::exp_rate: return ER::d2(theta);
    default: return NV::d2(theta);
    }
}

double cumulant(ModelId id, const Vector& theta) {
    if (id != ModelId::normal_two_param) {
        if (theta.size() != 1) throw std::invalid_argument("one-parameter model expects a 1-vector");
        return cumulant(id, theta(0));
    }
    return N2::c(as2(id, theta));
}

Vector cumulant_d1(ModelId id, const Vector& theta) {
    if (id != ModelId::normal_two_param) {
        if (theta.size() != 1) throw std::invalid_argument("one-parameter model expects a 1-vector");
        return Vector::Constant(1, cumulant_d1(id, theta(0)));
    }
    return N2::d1(as2(id, theta));
}

Matrix cumulant_d2(ModelId id, const Vector& theta) {
    if (id != ModelId::normal_two_param) {
        if (theta.size() != 1) throw std::invalid_argument("one-parameter model expects a 1-vector");
        return Matrix::Constant(1, 1, cumulant_d2(id, theta(0)));
    }
    return N2::d2(as2(id, theta));
}

double solve_theta_for_mean(ModelId id, double m) {
    require_one_param(id);
    double theta = 0.0;
    switch (id) {
    case ModelId::normal_mean: theta = NM::theta_for_mean(m); break;
    case ModelId::exp_rate:
        if (!(m > -1.0)) throw NoSolutionError("exp_rate: mean must exceed -1");
        theta = ER::theta_for_mean(m);
        break;
    default:
        if (!(m > -1.0 / kSqrt2)) throw NoSolutionError("normal_variance: mean must exceed -1/sqrt(2)");
        theta = NV::theta_for_mean(m);
        break;
    }
    if (!describe(id).domain[0].contains(theta)) {
        throw NoSolutionError(std::string(to_string(id)) + ": mean " + std::to_string(m) +
                              " is not attainable inside the domain");
    }
    return theta;
}

double conjugate(ModelId id, double m) {
    require_one_param(id);
    switch (id) {
    case ModelId::normal_mean: return NM::conjugate(m);
    case ModelId::exp_rate:
        if (!(m > -1.0)) throw NoSolutionError("exp_rate: mean must exceed -1");
        return ER::conjugate(m);
    default:
        if (!(m > -1.0 / kSqrt2)) throw NoSolutionError("normal_variance: mean must exceed -1/sqrt(2)");
        return NV::conjugate(m);
    }
}

double psi(ModelId id, double theta) {
    // theta c'(theta) - c(theta) is the conjugate evaluated at c'(theta);
    // the conjugate form avoids cancellation for small theta.
    return conjugate(id, cumulant_d1(id, theta));
}

double solve_psi(ModelId id, double target) {
    require_one_param(id);
    if (!(target >= 0.0)) throw std::invalid_argument("solve_psi: target must be non-negative");
    if (target == 0.0) return 0.0;
    if (!std::isfinite(target)) throw NoSolutionError("solve_psi: target is not finite");
    const double hi = describe(id).domain[0].hi;
    const auto f = [&](double t) { return psi(id, t) - target; };
    const auto df = [&](double t) { return t * cumulant_d2(id, t); };
    const double guess = std::sqrt(2.0 * target / cumulant_d2(id, 0.0));
    roots::Options opt;
    opt.f_tol = 1e-15 * std::max(1.0, target);
    return roots::increasing_root(f, df, 0.0, hi, std::min(guess, std::isfinite(hi) ? hi : guess), opt);
}

double psi_scale(const Eigen::Vector2d& theta, const Eigen::Vector2d& theta0) {
    const Eigen::Vector2d g = N2::d1(theta);
    return (theta - theta0).dot(g) - N2::c(theta) + N2::c(theta0);
}

Eigen::Vector2d solve_psi_scale(double theta01, double target, double theta02) {
    if (!(target >= 0.0)) throw std::invalid_argument("solve_psi_scale: target must be non-negative");
    if (!(theta01 < -kMargin)) throw DomainError("solve_psi_scale: theta01 must be negative");
    const Eigen::Vector2d theta0(theta01, theta02);
    if (target == 0.0) return theta0;
    // Only theta_1 moves, so psi(theta, theta0) reduces to
    // (t1 - theta01) c_1'(t1, theta02) - c(t1, theta02) + c(theta0).
    const auto at = [&](double t1) { return Eigen::Vector2d(t1, theta02); };
    const auto f = [&](double t1) { return psi_scale(at(t1), theta0) - target; };
    const auto df = [&](double t1) { return (t1 - theta01) * N2::d2(at(t1))(0, 0); };
    const double c11 = N2::d2(theta0)(0, 0);
    const double hi = -kMargin;
    const double guess = std::min(theta01 + std::sqrt(2.0 * target / c11), 0.5 * (theta01 + hi));
    roots::Options opt;
    opt.f_tol = 1e-15 * std::max(1.0, target);
    return at(roots::increasing_root(f, df, theta01, hi, guess, opt));
}

Eigen::Vector2d canonical_from_normal(NormalParams p) {
    if (!(p.variance > 0.0)) throw DomainError("normal variance must be positive");
    return {-0.5 / p.variance, p.mean / p.variance};
}

NormalParams normal_from_canonical(const Eigen::Vector2d& theta) {
    if (!(theta(0) < 0.0)) throw DomainError("normal_two_param: theta_1 must be negative");
    const double variance = -0.5 / theta(0);
    return {theta(1) * variance, variance};
}

double theta_from_natural(ModelId id, double natural) {
    switch (id) {
    case ModelId::normal_mean: return natural;
    case ModelId::exp_rate:
        if (!(natural > 0.0)) throw DomainError("exp_rate: mean 1/lambda must be positive");
        return 1.0 - 1.0 / natural;
    case ModelId::normal_variance:
        if (!(natural > 0.0)) throw DomainError("normal_variance: variance must be positive");
        return (1.0 - 1.0 / natural) / kSqrt2;
    case ModelId::normal_two_param: break;
    }
    throw std::invalid_argument("theta_from_natural: use canonical_from_normal for normal_two_param");
}

Sampler::Sampler(ModelId id, double theta) : id_(id) {
    require_one_param(id);
    check_domain(id, theta);
    switch (id) {
    case ModelId::normal_mean: a_ = theta; b_ = 1.0; break;
    case ModelId::exp_rate: a_ = 1.0 - theta; break;                          // rate
    default: b_ = 1.0 / std::sqrt(1.0 - kSqrt2 * theta); break;               // sd of Y
    }
}

Sampler::Sampler(NormalParams p) : id_(ModelId::normal_two_param), a_(p.mean) {
    if (!(p.variance > 0.0)) throw DomainError("normal variance must be positive");
    b_ = std::sqrt(p.variance);
}

double Sampler::operator()(Rng& rng) const {
    switch (id_) {
    case ModelId::exp_rate: {
        boost::random::exponential_distribution<double> e(a_);
        return e(rng) - 1.0;
    }
    case ModelId::normal_variance: {
        boost::random::normal_distribution<double> n;
        const double y = b_ * n(rng);
        return (y * y - 1.0) / kSqrt2;
    }
    default: {
        boost::random::normal_distribution<double> n;
        return a_ + b_ * n(rng);
    }
    }
}

namespace {

CanonicalSample draw_sample(ModelId id, const Vector& theta, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    const auto& d = describe(id);
    if (!d.in_domain(theta)) throw DomainError("sample: theta outside the canonical domain");
    Rng rng(seed);
    CanonicalSample out;
    out.source_theta = theta;
    out.values.resize(static_cast<Eigen::Index>(n), d.dim);
    if (d.dim == 1) {
        const Sampler s(id, theta(0));
        for (Eigen::Index i = 0; i < out.values.rows(); ++i) out.values(i, 0) = s(rng);
    } else {
        const Sampler s(normal_from_canonical(Eigen::Vector2d(theta(0), theta(1))));
        for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
            const double x = s(rng);
            out.values(i, 0) = x * x;
            out.values(i, 1) = x;
        }
    }
    return out;
}

} // namespace

CanonicalSample sample_null(ModelId id, std::size_t n, std::uint64_t seed) {
    return draw_sample(id, describe(id).null_theta(), n, seed);
}

CanonicalSample sample_alt(ModelId id, const Vector& theta, std::size_t n, std::uint64_t seed) {
    return draw_sample(id, theta, n, seed);
}

TwoParamMle mle_two_param(double sum_x, double sum_x2, std::size_t w) {
    if (w < 2) throw std::invalid_argument("mle_two_param: window must hold at least 2 values");
    const double n = static_cast<double>(w);
    const double mean = sum_x / n;
    const double second = sum_x2 / n;
    const double variance = second - mean * mean;
    // Running sums carry rounding noise of order 1e-16 * second.
    if (!(variance > 1e-12 * second)) {
        throw DegenerateWindowError("window variance is zero (all values identical)");
    }
    return {-0.5 / variance, mean / variance, variance, mean};
}

} // namespace transient::efam
