#pragma once

// Closed-form cumulant functions of the catalog models, templated on the
// scalar type so tests can evaluate them in extended precision.

#include <cmath>

#include <Eigen/Core>

namespace transient::efam::closed_form {

template <class Scalar>
Scalar sqrt2() {
    using std::sqrt;
    return sqrt(Scalar(2));
}

/// x - log(1 + x), accurate for small |x|.
template <class Scalar>
Scalar x_minus_log1p(Scalar x) {
    using std::abs;
    using std::log1p;
    if (abs(x) < Scalar(1e-3)) {
        const Scalar x2 = x * x;
        return x2 * (Scalar(1) / 2 - x / 3 + x2 / 4 - x2 * x / 5 + x2 * x2 / 6 - x2 * x2 * x / 7);
    }
    return x - log1p(x);
}

// N(theta, 1): c(theta) = theta^2 / 2.
template <class Scalar>
struct NormalMean {
    static Scalar c(Scalar t) { return t * t / 2; }
    static Scalar d1(Scalar t) { return t; }
    static Scalar d2(Scalar) { return Scalar(1); }
    static Scalar theta_for_mean(Scalar m) { return m; }
    static Scalar conjugate(Scalar m) { return m * m / 2; }
};

// X = Y - 1 with Y ~ Exp(1 - theta): c(theta) = -theta - log(1 - theta).
template <class Scalar>
struct ExpRate {
    static Scalar c(Scalar t) {
        using std::log1p;
        return -t - log1p(-t);
    }
    static Scalar d1(Scalar t) { return t / (1 - t); }
    static Scalar d2(Scalar t) { return 1 / ((1 - t) * (1 - t)); }
    static Scalar theta_for_mean(Scalar m) { return m / (1 + m); }
    static Scalar conjugate(Scalar m) { return x_minus_log1p(m); }
};

// X = (Y^2 - 1)/sqrt(2) with Y ~ N(0, 1/(1 - sqrt(2) theta)).
template <class Scalar>
struct NormalVariance {
    static Scalar c(Scalar t) {
        using std::log1p;
        return -t / sqrt2<Scalar>() - log1p(-sqrt2<Scalar>() * t) / 2;
    }
    static Scalar d1(Scalar t) { return t / (1 - sqrt2<Scalar>() * t); }
    static Scalar d2(Scalar t) {
        const Scalar u = 1 - sqrt2<Scalar>() * t;
        return 1 / (u * u);
    }
    static Scalar theta_for_mean(Scalar m) { return m / (1 + sqrt2<Scalar>() * m); }
    static Scalar conjugate(Scalar m) { return x_minus_log1p(sqrt2<Scalar>() * m) / 2; }
};

// N(mu, sigma^2) with theta = (-1/(2 sigma^2), mu/sigma^2), t(x) = (x^2, x).
template <class Scalar>
struct NormalTwoParam {
    using Vector = Eigen::Matrix<Scalar, 2, 1>;
    using Matrix = Eigen::Matrix<Scalar, 2, 2>;

    static Scalar c(const Vector& t) {
        using std::log;
        return -t(1) * t(1) / (4 * t(0)) - log(-2 * t(0)) / 2;
    }
    static Vector d1(const Vector& t) {
        const Scalar t1 = t(0), t2 = t(1);
        return Vector(t2 * t2 / (4 * t1 * t1) - 1 / (2 * t1), -t2 / (2 * t1));
    }
    static Matrix d2(const Vector& t) {
        const Scalar t1 = t(0), t2 = t(1);
        Matrix h;
        h(0, 0) = -t2 * t2 / (2 * t1 * t1 * t1) + 1 / (2 * t1 * t1);
        h(0, 1) = t2 / (2 * t1 * t1);
        h(1, 0) = h(0, 1);
        h(1, 1) = -1 / (2 * t1);
        return h;
    }
};

} // namespace transient::efam::closed_form
