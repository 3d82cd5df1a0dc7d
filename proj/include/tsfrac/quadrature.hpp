#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace tsfrac {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    long panels = 0;
};

class QuadratureError : public std::runtime_error {
  public:
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

struct SimpsonState {
    long panels = 0;
    long max_panels;
    double err_acc = 0.0;
};

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth, SimpsonState& st) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double h = b - a;
    const double left = (h / 12.0) * (fa + 4.0 * flm + fm);
    const double right = (h / 12.0) * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    st.panels += 2;
    if (depth <= 0 || st.panels > st.max_panels) {
        st.err_acc += std::fabs(delta);
        if (std::fabs(delta) > 15.0 * tol) st.err_acc += 1.0; // force nonconvergence
        return left + right + delta / 15.0;
    }
    if (std::fabs(delta) <= 15.0 * tol) {
        st.err_acc += std::fabs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, st) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, st);
}

} // namespace detail

/// Adaptive interval-halving (Simpson) quadrature with an absolute tolerance and
/// a hard subdivision cap; nonconvergence is reported, not silently absorbed.
template <class F>
QuadResult adaptive_quad(const F& f, double a, double b, double abs_tol = 1e-10,
                         long max_panels = 16384) {
    QuadResult r;
    if (a == b) return r;
    detail::SimpsonState st;
    st.max_panels = max_panels;
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    st.panels = 2;
    r.value = detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, 48, st);
    r.panels = st.panels;
    r.error_estimate = st.err_acc;
    r.converged = std::isfinite(r.value) && st.err_acc <= 4.0 * abs_tol && st.panels <= max_panels;
    return r;
}

/// Integrate f over [r0, infinity) by dyadic segments, stopping when segments
/// become negligible. Sets converged=false on apparent divergence.
template <class F>
QuadResult quad_to_infinity(const F& f, double r0, double abs_tol = 1e-10) {
    QuadResult total;
    double lo = r0;
    int quiet = 0;
    for (int k = 0; k < 2400; ++k) {
        const double hi = lo * 2.0;
        QuadResult seg = adaptive_quad(f, lo, hi, abs_tol * 0.25);
        total.value += seg.value;
        total.error_estimate += seg.error_estimate;
        total.panels += seg.panels;
        if (!seg.converged) total.converged = false;
        if (!std::isfinite(total.value) || std::fabs(total.value) > 1e200) {
            total.converged = false;
            return total;
        }
        if (std::fabs(seg.value) < abs_tol * 1e-2) {
            if (++quiet >= 3) return total;
        } else {
            quiet = 0;
        }
        if (hi > 1e290) return total; // any integrable tail is numerically zero here
        lo = hi;
    }
    total.converged = false; // tail did not decay within the segment budget
    return total;
}

} // namespace tsfrac
