#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsfrac/function.hpp"
#include "tsfrac/kernel.hpp"

namespace tsfrac {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class OperatorFlavor { Caputo, RiemannLiouville };

/// Data of the two-sided boundary value problem on (a,b):
/// lambda u - TS(u) = g, u(a) = u_a, u(b) = u_b,
/// where TS is the two-sided generator-form operator.
struct ProblemSpec {
    double a = -1.0;
    double b = 1.0;
    double lambda = 0.0;
    std::function<double(double)> g;
    double u_a = 0.0;
    double u_b = 0.0;
    DiffusionCoefficients coeffs;
    TwoSidedKernel kernel = TwoSidedKernel::symmetric(KernelSpec::classical_stable(0.5));
    OperatorFlavor flavor = OperatorFlavor::Caputo;

    double g_at(double x) const { return g ? g(x) : 0.0; }

    void validate() const {
        if (!(a < b)) throw ConfigError("problem: need a < b");
        if (!(lambda >= 0.0)) throw ConfigError("problem: lambda must be >= 0");
        if (!coeffs.alpha_zero()) {
            // diffusion-active regime: alpha > 0 on [a,b] with alpha' vanishing
            // at the endpoints
            const double h = 1e-6 * (b - a);
            for (double x : {a, 0.5 * (a + b), b})
                if (!(coeffs.alpha_at(x) > 0.0))
                    throw ConfigError("problem: alpha must be positive on [a,b]");
            const double da = (coeffs.alpha_at(a + h) - coeffs.alpha_at(a)) / h;
            const double db = (coeffs.alpha_at(b) - coeffs.alpha_at(b - h)) / h;
            if (std::fabs(da) > 1e-3 || std::fabs(db) > 1e-3)
                throw ConfigError("problem: alpha' must vanish at the endpoints");
        }
    }

    /// Soft diagnostics: conditions of the well-posedness theory that are not
    /// hard configuration errors (drift not vanishing at the endpoints).
    std::vector<std::string> validate_warnings() const {
        std::vector<std::string> w;
        constexpr double tol = 1e-8;
        if (!coeffs.gamma_zero() &&
            (std::fabs(coeffs.gamma_at(a)) > tol || std::fabs(coeffs.gamma_at(b)) > tol))
            w.push_back("gamma does not vanish at the endpoints; "
                        "outside the conforming regime of the well-posedness theory");
        return w;
    }
};

/// Values of a function sampled on a uniform grid over [a,b].
struct GridFunction {
    std::vector<double> xs;
    std::vector<double> values;

    static GridFunction uniform(double a, double b, std::size_t n_nodes) {
        if (n_nodes < 3) throw ConfigError("grid: node count must be >= 3");
        GridFunction g;
        g.xs.resize(n_nodes);
        g.values.assign(n_nodes, 0.0);
        const double h = (b - a) / static_cast<double>(n_nodes - 1);
        for (std::size_t i = 0; i < n_nodes; ++i) g.xs[i] = a + h * static_cast<double>(i);
        g.xs.back() = b;
        return g;
    }

    std::size_t size() const { return xs.size(); }
    double spacing() const { return xs[1] - xs[0]; }

    /// Piecewise-linear evaluation at x in [a,b].
    double interpolate(double x) const {
        const double a = xs.front(), b = xs.back();
        if (x <= a) return values.front();
        if (x >= b) return values.back();
        const double h = spacing();
        std::size_t i = static_cast<std::size_t>((x - a) / h);
        if (i >= xs.size() - 1) i = xs.size() - 2;
        const double t = (x - xs[i]) / h;
        return (1.0 - t) * values[i] + t * values[i + 1];
    }
};

} // namespace tsfrac
