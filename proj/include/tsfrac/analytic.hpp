#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "tsfrac/quadrature.hpp"
#include "tsfrac/special.hpp"

namespace tsfrac::analytic {

/// Closed-form exit identities for the standard symmetric beta-stable process on
/// (-1,1). General intervals map by x -> 2(x-a)/(b-a) - 1; time-scaled
/// quantities (mean exit time, potential density) carry the factor
/// ((b-a)/2)^beta.

namespace an_detail {

// integrate f over [lo, hi] with dyadic panels shrinking toward hi, where the
// integrand vanishes with a fractional-power singularity in its derivative;
// the geometric decay of the panel values justifies early truncation
template <class F>
inline QuadResult upper_graded_quad(const F& f, double lo, double hi, double tol) {
    QuadResult total;
    if (hi <= lo) return total;
    const double width = hi - lo;
    double a0 = lo;
    for (int i = 0; i < 200 && a0 < hi; ++i) {
        double b0 = hi - width * std::pow(0.5, i + 1);
        if (b0 <= a0 || hi - b0 < 1e-15 * width) b0 = hi;
        QuadResult seg = adaptive_quad(f, a0, b0, tol * 0.25, 1 << 16);
        total.value += seg.value;
        total.error_estimate += seg.error_estimate;
        total.panels += seg.panels;
        if (!seg.converged) total.converged = false;
        if (b0 == hi) return total;
        if (std::fabs(seg.value) <= 0.01 * tol) return total; // remaining tail negligible
        a0 = b0;
    }
    return total;
}

// integrate f over [lo, hi] when f has fractional-power behavior at both
// endpoints: f - f(lo) vanishes at lo and f vanishes at hi. The lower half is
// handled as f(lo)*(mid-lo) plus dyadic panels of f - f(lo) shrinking toward
// lo; the upper half grades toward hi.
template <class F>
inline QuadResult edge_graded_quad(const F& f, double lo, double hi, double tol) {
    QuadResult total;
    if (hi <= lo) return total;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo);
    total.value = flo * (mid - lo);
    const double width = mid - lo;
    double b0 = mid;
    for (int i = 0; i < 200; ++i) {
        const double a0 = lo + width * std::pow(0.5, i + 1);
        QuadResult seg =
            adaptive_quad([&](double u) { return f(u) - flo; }, std::min(a0, b0), b0, tol * 0.25,
                          1 << 16);
        total.value += seg.value;
        total.error_estimate += seg.error_estimate;
        total.panels += seg.panels;
        if (!seg.converged) total.converged = false;
        if (std::fabs(seg.value) <= 0.01 * tol) break; // the remainder decays geometrically
        b0 = a0;
    }
    QuadResult up = upper_graded_quad(f, mid, hi, tol);
    total.value += up.value;
    total.error_estimate += up.error_estimate;
    total.panels += up.panels;
    if (!up.converged) total.converged = false;
    return total;
}

} // namespace an_detail

inline void require_order(double beta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::domain_error("analytic: beta must lie strictly in (0,1)");
}

/// E[tau] = (1 - x^2)^{beta/2} / Gamma(beta + 1).
inline double mean_exit_time(double beta, double x) {
    require_order(beta);
    if (std::fabs(x) > 1.0) throw std::domain_error("mean_exit_time: |x| must be <= 1");
    return std::pow(1.0 - x * x, beta / 2.0) / gamma_fn(beta + 1.0);
}

/// P[exit through the upper boundary]:
/// h(x) = 2^{1-beta} Gamma(beta)/Gamma(beta/2)^2 int_{-1}^x (1-y^2)^{beta/2-1} dy,
/// evaluated exactly as (1 + sgn(x) I_{x^2}(1/2, beta/2)) / 2.
inline double harmonic_measure_upper(double beta, double x) {
    require_order(beta);
    if (std::fabs(x) > 1.0) throw std::domain_error("harmonic_measure_upper: |x| must be <= 1");
    if (x == 0.0) return 0.5;
    const double s = x > 0.0 ? 1.0 : -1.0;
    return 0.5 * (1.0 + s * reg_incomplete_beta(0.5, beta / 2.0, x * x));
}

inline double harmonic_measure_lower(double beta, double x) {
    return 1.0 - harmonic_measure_upper(beta, x);
}

/// Density of the potential measure H_beta(x, y):
/// 2^{-beta}/Gamma(beta/2)^2 |x-y|^{beta-1} int_0^z r^{beta/2-1}(r+1)^{-1/2} dr
/// with z = (1-x^2)(1-y^2)/(x-y)^2; the inner integral is the incomplete beta
/// B(z/(1+z); beta/2, (1-beta)/2). Integrable |x-y|^{beta-1} singularity at y=x.
inline double potential_density(double beta, double x, double y) {
    require_order(beta);
    if (std::fabs(x) >= 1.0 || std::fabs(y) >= 1.0)
        throw std::domain_error("potential_density: x,y must lie in (-1,1)");
    if (x == y) throw std::domain_error("potential_density: singular at y = x");
    const double z = (1.0 - x * x) * (1.0 - y * y) / ((x - y) * (x - y));
    const double inner = incomplete_beta(beta / 2.0, (1.0 - beta) / 2.0, z / (1.0 + z));
    const double g2 = gamma_fn(beta / 2.0);
    return std::pow(2.0, -beta) / (g2 * g2) * std::pow(std::fabs(x - y), beta - 1.0) * inner;
}

/// int_{-1}^1 q(y) H_beta(x, y) dy with the |x-y|^{beta-1} singularity removed
/// by the power substitution u = |y-x|^beta on each side of x.
inline double potential_integral(double beta, double x,
                                 const std::function<double(double)>& q, double abs_tol = 1e-9) {
    require_order(beta);
    const double inv_beta = 1.0 / beta;
    auto side = [&](double dir, double span) {
        if (span <= 0.0) return 0.0;
        auto integrand = [&](double u) {
            const double pa0 = beta / 2.0, pb0 = (1.0 - beta) / 2.0;
            if (u <= 0.0) {
                // continuous limit at y -> x: the inner integral saturates
                const double g2l = gamma_fn(pa0);
                return q(x) * std::pow(2.0, -beta) / (g2l * g2l) * complete_beta(pa0, pb0) / beta;
            }
            const double d = std::pow(u, inv_beta); // |y - x|
            double y = x + dir * d;
            if (std::fabs(y) >= 1.0) return 0.0;
            // H * dy/du; the |x-y|^{beta-1} factor cancels against the Jacobian.
            // Near y = x the argument approaches 1, so the complement form with
            // wc = 1 - w computed directly keeps full precision there.
            const double z = (1.0 - x * x) * (1.0 - y * y) / (d * d);
            const double pa = beta / 2.0, pb = (1.0 - beta) / 2.0;
            double inner;
            if (!std::isfinite(z)) {
                inner = complete_beta(pa, pb);
            } else if (z > 1.0) {
                const double wc = 1.0 / (1.0 + z);
                inner = complete_beta(pa, pb) - incomplete_beta(pb, pa, wc);
            } else {
                inner = incomplete_beta(pa, pb, z / (1.0 + z));
            }
            const double g2 = gamma_fn(beta / 2.0);
            const double h_reduced = std::pow(2.0, -beta) / (g2 * g2) * inner / beta;
            return q(y) * h_reduced;
        };
        QuadResult r =
            an_detail::edge_graded_quad(integrand, 0.0, std::pow(span, beta), abs_tol * 0.5);
        if (!r.converged) throw QuadratureError("potential_integral: quadrature did not converge");
        return r.value;
    };
    return side(-1.0, x + 1.0) + side(+1.0, 1.0 - x);
}

/// Generalized solution of the two-sided equation on (-1,1) with lambda = 0:
/// (u_upper - u_lower) h(x) + u_lower + int g(y) H_beta(x,y) dy.
inline double general_solution(double beta, double x, double u_lower, double u_upper,
                               const std::function<double(double)>& g) {
    double v = (u_upper - u_lower) * harmonic_measure_upper(beta, x) + u_lower;
    if (g) v += potential_integral(beta, x, g);
    return v;
}

struct BrownianReference {
    double exit_prob_upper;
    double mean_exit_time;
};

/// Classical diffusion oracle for generator alpha f'' on (a,b):
/// P[upper] = (x-a)/(b-a), E[tau] = (x-a)(b-x)/(2 alpha).
inline BrownianReference brownian_references(double alpha_const, double a, double b, double x) {
    if (!(alpha_const > 0.0)) throw std::domain_error("brownian_references: alpha must be positive");
    if (x < a || x > b) throw std::domain_error("brownian_references: x outside [a,b]");
    return {(x - a) / (b - a), (x - a) * (b - x) / (2.0 * alpha_const)};
}

/// Affine rescaling helpers for a general interval (a,b).
inline double to_unit_interval(double a, double b, double x) { return 2.0 * (x - a) / (b - a) - 1.0; }
inline double time_scale(double a, double b, double beta) { return std::pow(0.5 * (b - a), beta); }

} // namespace tsfrac::analytic
