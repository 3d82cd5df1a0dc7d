#pragma once

#include <cmath>
#include <stdexcept>

#include "tsfrac/function.hpp"
#include "tsfrac/kernel.hpp"
#include "tsfrac/problem.hpp"
#include "tsfrac/quadrature.hpp"

namespace tsfrac {

/// Pointwise evaluation of the generalized one-sided and two-sided operators in
/// generator form: the returned values are those of -D_{a+*}, -D_{b-*} and
/// -L_{[a,b]*}-style sums (nonpositive on interior maxima). The classical
/// fractional derivative D^beta equals minus the generator form.

namespace op_detail {

constexpr double kQuadTol = 1e-10;

inline double singular_split(double span_left, double span_right) {
    // delta = min(1e-4, half the distance to each terminal in play)
    double d = 1e-4;
    if (span_left > 0.0) d = std::min(d, 0.5 * span_left);
    if (span_right > 0.0) d = std::min(d, 0.5 * span_right);
    return d;
}

// int_0^delta y^2 nu(x,y) dy by dyadic panels shrinking toward 0; each panel
// avoids the origin, and the panel values decay geometrically (the integrand
// is y^{1-beta}-like), so truncation once panels are negligible is safe
inline double segment_second_moment(const KernelSpec& k, double x, double delta) {
    double total = 0.0;
    double hi = delta;
    for (int i = 0; i < 2000; ++i) {
        const double lo = 0.5 * hi;
        QuadResult q = adaptive_quad([&](double y) { return y * y * k.density(x, y); }, lo, hi,
                                     1e-14, 1 << 12);
        if (!q.converged)
            throw QuadratureError("segment_second_moment: quadrature did not converge");
        total += q.value;
        if (std::fabs(q.value) <= 1e-8 * std::fabs(total)) return total;
        hi = lo;
    }
    return total;
}

// integrate f over [lo, hi] with dyadic panels doubling away from lo, so the
// recursion depth stays modest even when the integrand is steep near lo
template <class F>
inline QuadResult graded_quad(const F& f, double lo, double hi, double tol) {
    QuadResult total;
    if (hi <= lo) return total;
    const int n_seg = std::max(1, static_cast<int>(std::ceil(std::log2(hi / lo))) + 1);
    const double seg_tol = tol / n_seg;
    double a0 = lo;
    while (a0 < hi) {
        const double b0 = std::min(2.0 * a0, hi);
        QuadResult seg = adaptive_quad(f, a0, b0, seg_tol, 1 << 16);
        total.value += seg.value;
        total.error_estimate += seg.error_estimate;
        total.panels += seg.panels;
        if (!seg.converged) total.converged = false;
        a0 = b0;
    }
    return total;
}

} // namespace op_detail

/// Generalized left-sided operator in generator form at x, terminal a:
/// int_0^{x-a} (f(x-y) - f(x)) nu(x,y) dy + (f(a) - f(x)) int_{x-a}^inf nu.
/// The [0,delta] segment uses a second-order Taylor form (first and second
/// kernel moments); [delta, x-a] adaptive quadrature.
inline double caputo_left(const SmoothFunction& f, const KernelSpec& k, double a, double x) {
    if (x < a || x > f.b() + 1e-15) throw std::domain_error("caputo_left: x outside [a,b]");
    const double span = x - a;
    if (span <= 0.0) return 0.0;
    const double fx = f(x);
    const double delta = op_detail::singular_split(span, 0.0);
    double v = -f.derivative(x) * k.segment_first_moment(x, 0.0, delta) +
               0.5 * f.second_derivative(x) * op_detail::segment_second_moment(k, x, delta);
    if (span > delta) {
        QuadResult q = op_detail::graded_quad(
            [&](double y) { return (f(x - y) - fx) * k.density(x, y); }, delta, span,
            op_detail::kQuadTol);
        if (!q.converged) throw QuadratureError("caputo_left: quadrature did not converge");
        v += q.value;
    }
    v += (f(a) - fx) * k.tail_mass(x, span);
    return v;
}

/// Mirror image with terminal b.
inline double caputo_right(const SmoothFunction& f, const KernelSpec& k, double b, double x) {
    if (x > b || x < f.a() - 1e-15) throw std::domain_error("caputo_right: x outside [a,b]");
    const double span = b - x;
    if (span <= 0.0) return 0.0;
    const double fx = f(x);
    const double delta = op_detail::singular_split(span, 0.0);
    double v = f.derivative(x) * k.segment_first_moment(x, 0.0, delta) +
               0.5 * f.second_derivative(x) * op_detail::segment_second_moment(k, x, delta);
    if (span > delta) {
        QuadResult q = op_detail::graded_quad(
            [&](double y) { return (f(x + y) - fx) * k.density(x, y); }, delta, span,
            op_detail::kQuadTol);
        if (!q.converged) throw QuadratureError("caputo_right: quadrature did not converge");
        v += q.value;
    }
    v += (f(b) - fx) * k.tail_mass(x, span);
    return v;
}

/// RL-type variants: the boundary value is dropped from the tail term.
inline double rl_left(const SmoothFunction& f, const KernelSpec& k, double a, double x) {
    if (x <= a) return 0.0;
    return caputo_left(f, k, a, x) - f(a) * k.tail_mass(x, x - a);
}

inline double rl_right(const SmoothFunction& f, const KernelSpec& k, double b, double x) {
    if (x >= b) return 0.0;
    return caputo_right(f, k, b, x) - f(b) * k.tail_mass(x, b - x);
}

enum class OperatorSide { Left, Right };

/// Classical Caputo derivative D^beta of order beta in (0,1), evaluated through
/// the first-derivative integral with the substitution u = y^{1-beta}. This is
/// an independent code path from caputo_left/right and serves as their oracle:
/// caputo_left with the classical-stable kernel equals -classical_caputo.
inline double classical_caputo(const SmoothFunction& f, double beta, double terminal,
                               OperatorSide side, double x) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("classical_caputo: beta outside (0,1)");
    const double span = side == OperatorSide::Left ? x - terminal : terminal - x;
    if (span < 0.0) throw std::domain_error("classical_caputo: x beyond the terminal");
    if (span == 0.0) return 0.0;
    const double p = 1.0 / (1.0 - beta);
    const double upper = std::pow(span, 1.0 - beta);
    const double sgn = side == OperatorSide::Left ? 1.0 : -1.0;
    auto integrand = [&](double u) {
        const double y = std::pow(u, p);
        return f.derivative(side == OperatorSide::Left ? x - y : x + y);
    };
    QuadResult q = adaptive_quad(integrand, 0.0, upper, op_detail::kQuadTol);
    if (!q.converged) throw QuadratureError("classical_caputo: quadrature did not converge");
    return sgn * q.value / ((1.0 - beta) * gamma_fn(1.0 - beta));
}

/// gamma(x) f'(x) + alpha(x) f''(x).
inline double diffusion_apply(const SmoothFunction& f, const DiffusionCoefficients& c, double x) {
    double v = 0.0;
    if (!c.gamma_zero()) v += c.gamma_at(x) * f.derivative(x);
    if (!c.alpha_zero()) v += c.alpha_at(x) * f.second_derivative(x);
    return v;
}

/// Two-sided operator TS(f) = left + right + drift-diffusion, generator form.
inline double two_sided_apply(const SmoothFunction& f, const ProblemSpec& spec, double x,
                              OperatorFlavor flavor = OperatorFlavor::Caputo) {
    if (x < spec.a || x > spec.b) throw std::domain_error("two_sided_apply: x outside [a,b]");
    double v;
    if (flavor == OperatorFlavor::Caputo)
        v = caputo_left(f, spec.kernel.plus, spec.a, x) +
            caputo_right(f, spec.kernel.minus, spec.b, x);
    else
        v = rl_left(f, spec.kernel.plus, spec.a, x) + rl_right(f, spec.kernel.minus, spec.b, x);
    return v + diffusion_apply(f, spec.coeffs, x);
}

/// Generator of the free (unrestricted) process:
/// int_0^inf (f(x-y)-f(x)) nu_plus dy + int_0^inf (f(x+y)-f(x)) nu_minus dy
/// + gamma f' + alpha f''. The value callable of f must extend to all of R.
inline double free_generator_apply(const SmoothFunction& f, const ProblemSpec& spec, double x) {
    const double fx = f(x);
    const double delta = 1e-4;
    auto one_side = [&](const KernelSpec& k, double dir) {
        double v = dir * f.derivative(x) * k.segment_first_moment(x, 0.0, delta) +
                   0.5 * f.second_derivative(x) * op_detail::segment_second_moment(k, x, delta);
        QuadResult q = quad_to_infinity(
            [&](double y) { return (f(x + dir * y) - fx) * k.density(x, y); }, delta,
            op_detail::kQuadTol);
        if (!q.converged)
            throw QuadratureError("free_generator_apply: insufficient decay of the extension");
        return v + q.value;
    };
    return one_side(spec.kernel.plus, -1.0) + one_side(spec.kernel.minus, +1.0) +
           diffusion_apply(f, spec.coeffs, x);
}

} // namespace tsfrac
