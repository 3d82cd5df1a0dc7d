#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsfrac {

/// log Gamma(z) for z > 0. |relative error| <= 1e-12 on (0, 170).
inline double log_gamma(double z) {
    if (!(z > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
    return std::lgamma(z);
}

inline double gamma_fn(double z) {
    if (!(z > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
    return std::tgamma(z);
}

inline double log_beta(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 400;
    constexpr double eps = 1e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

} // namespace detail

/// Regularized incomplete beta I_x(a,b), a,b > 0, x in [0,1].
inline double reg_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("reg_incomplete_beta: a,b must be positive");
    if (x < 0.0 || x > 1.0) throw std::domain_error("reg_incomplete_beta: x must be in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * detail::beta_cf(a, b, x) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                     detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Unregularized incomplete beta B(x; a, b) = int_0^x t^{a-1}(1-t)^{b-1} dt.
inline double incomplete_beta(double a, double b, double x) {
    return reg_incomplete_beta(a, b, x) * std::exp(log_beta(a, b));
}

inline double complete_beta(double a, double b) {
    return std::exp(log_beta(a, b));
}

} // namespace tsfrac
