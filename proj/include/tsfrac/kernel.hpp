#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsfrac/quadrature.hpp"
#include "tsfrac/special.hpp"

namespace tsfrac {

class KernelError : public std::runtime_error {
  public:
    explicit KernelError(const std::string& what) : std::runtime_error(what) {}
};

enum class KernelVariant { ClassicalStable, TemperedStable, VariableOrder, Custom };

/// One-sided jump kernel nu(x, y), y > 0: a Levy-type intensity for jump
/// magnitudes in one direction. Immutable after construction.
class KernelSpec {
  public:
    static constexpr double kCustomTailTol = 1e-10;

    static KernelSpec classical_stable(double beta, double weight = 1.0) {
        require_order(beta);
        require_weight(weight);
        KernelSpec k;
        k.variant_ = KernelVariant::ClassicalStable;
        k.beta_ = beta;
        k.weight_ = weight;
        return k;
    }

    static KernelSpec tempered_stable(double beta, double tempering, double weight = 1.0) {
        require_order(beta);
        require_weight(weight);
        if (!(tempering >= 0.0)) throw KernelError("tempering rate must be >= 0");
        KernelSpec k;
        k.variant_ = KernelVariant::TemperedStable;
        k.beta_ = beta;
        k.tempering_ = tempering;
        k.weight_ = weight;
        return k;
    }

    static KernelSpec variable_order(std::function<double(double)> beta_of_x, double weight = 1.0) {
        require_weight(weight);
        if (!beta_of_x) throw KernelError("variable-order kernel needs an order function");
        KernelSpec k;
        k.variant_ = KernelVariant::VariableOrder;
        k.order_fn_ = std::move(beta_of_x);
        k.weight_ = weight;
        return k;
    }

    /// Custom density nu(x,y), y>0. A tail-mass routine int_r^inf nu(x,y)dy may be
    /// supplied; otherwise adaptive quadrature with absolute tolerance 1e-10 is used.
    static KernelSpec custom(std::function<double(double, double)> density,
                             std::function<double(double, double)> tail_mass = nullptr) {
        if (!density) throw KernelError("custom kernel needs a density");
        KernelSpec k;
        k.variant_ = KernelVariant::Custom;
        k.custom_density_ = std::move(density);
        k.custom_tail_ = std::move(tail_mass);
        return k;
    }

    KernelVariant variant() const { return variant_; }
    double beta() const { return beta_; }
    double tempering() const { return tempering_; }
    double weight() const { return weight_; }

    /// True when the density may vary with the state x (variable-order or
    /// custom variants); callers may cache evaluations otherwise.
    bool x_dependent() const {
        return variant_ == KernelVariant::VariableOrder || variant_ == KernelVariant::Custom;
    }

    double order_at(double x) const {
        if (variant_ == KernelVariant::VariableOrder) {
            const double b = order_fn_(x);
            require_order(b);
            return b;
        }
        return beta_;
    }

    /// nu(x, y) for y > 0.
    double density(double x, double y) const {
        if (!(y > 0.0)) throw std::domain_error("kernel density: y must be nonzero");
        switch (variant_) {
            case KernelVariant::ClassicalStable:
                return weight_ * beta_ / (gamma_fn(1.0 - beta_) * std::pow(y, 1.0 + beta_));
            case KernelVariant::TemperedStable:
                return weight_ * beta_ * std::exp(-tempering_ * y) /
                       (gamma_fn(1.0 - beta_) * std::pow(y, 1.0 + beta_));
            case KernelVariant::VariableOrder: {
                const double b = order_at(x);
                return weight_ * b / (gamma_fn(1.0 - b) * std::pow(y, 1.0 + b));
            }
            case KernelVariant::Custom: {
                const double v = custom_density_(x, y);
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw KernelError("custom kernel density must be nonnegative and finite");
                return v;
            }
        }
        return 0.0;
    }

    /// int_r^inf nu(x, y) dy.
    double tail_mass(double x, double r) const {
        if (!(r > 0.0)) throw std::domain_error("tail_mass: radius must be positive");
        switch (variant_) {
            case KernelVariant::ClassicalStable:
                return weight_ * std::pow(r, -beta_) / gamma_fn(1.0 - beta_);
            case KernelVariant::VariableOrder: {
                const double b = order_at(x);
                return weight_ * std::pow(r, -b) / gamma_fn(1.0 - b);
            }
            case KernelVariant::TemperedStable: {
                if (tempering_ == 0.0)
                    return weight_ * std::pow(r, -beta_) / gamma_fn(1.0 - beta_);
                QuadResult q = quad_to_infinity([&](double y) { return density(x, y); }, r,
                                                kCustomTailTol);
                if (!q.converged) throw KernelError("tempered tail-mass quadrature did not converge");
                return q.value;
            }
            case KernelVariant::Custom: {
                if (custom_tail_) {
                    const double v = custom_tail_(x, r);
                    if (!(v >= 0.0) || !std::isfinite(v))
                        throw KernelError("custom tail mass must be nonnegative and finite");
                    return v;
                }
                QuadResult q = quad_to_infinity([&](double y) { return density(x, y); }, r,
                                                kCustomTailTol);
                if (!q.converged)
                    throw KernelError("custom kernel tail is not integrable within tolerance");
                return q.value;
            }
        }
        return 0.0;
    }

    /// int_{r1}^{r2} nu(x, y) dy, 0 < r1 <= r2.
    double segment_mass(double x, double r1, double r2) const {
        if (!(0.0 < r1 && r1 <= r2)) throw std::domain_error("segment_mass: need 0 < r1 <= r2");
        if (r1 == r2) return 0.0;
        switch (variant_) {
            case KernelVariant::ClassicalStable:
            case KernelVariant::VariableOrder: {
                const double b = order_at(x);
                return weight_ * (std::pow(r1, -b) - std::pow(r2, -b)) / gamma_fn(1.0 - b);
            }
            default: {
                QuadResult q =
                    adaptive_quad([&](double y) { return density(x, y); }, r1, r2, kCustomTailTol);
                if (!q.converged) throw KernelError("segment-mass quadrature did not converge");
                return q.value;
            }
        }
    }

    /// int_{r1}^{r2} y nu(x, y) dy, 0 <= r1 <= r2. Finite at r1 = 0 under (H0);
    /// divergence of the small-jump moment raises KernelError.
    double segment_first_moment(double x, double r1, double r2) const {
        if (!(0.0 <= r1 && r1 <= r2)) throw std::domain_error("segment_first_moment: need 0 <= r1 <= r2");
        if (r1 == r2) return 0.0;
        switch (variant_) {
            case KernelVariant::ClassicalStable:
            case KernelVariant::VariableOrder: {
                const double b = order_at(x);
                const double c = weight_ * b / ((1.0 - b) * gamma_fn(1.0 - b));
                return c * (std::pow(r2, 1.0 - b) - std::pow(r1, 1.0 - b));
            }
            default: {
                auto f = [&](double y) { return y * density(x, y); };
                if (r1 > 0.0) {
                    QuadResult q = adaptive_quad(f, r1, r2, kCustomTailTol);
                    if (!q.converged) throw KernelError("first-moment quadrature did not converge");
                    return q.value;
                }
                // Geometric decomposition toward 0; detects a divergent small-jump moment.
                double total = 0.0;
                double hi = r2;
                double prev = std::numeric_limits<double>::infinity();
                int growing = 0;
                for (int j = 0; j < 220; ++j) {
                    const double lo = hi * 0.5;
                    QuadResult q = adaptive_quad(f, lo, hi, kCustomTailTol * 0.25);
                    if (!q.converged) throw KernelError("first-moment quadrature did not converge");
                    total += q.value;
                    if (q.value > prev * 1.0001) {
                        if (++growing >= 8)
                            throw KernelError("small-jump first moment diverges: (H0) violated");
                    } else {
                        growing = 0;
                    }
                    prev = q.value;
                    if (q.value < kCustomTailTol * 1e-2 || lo < 1e-300) return total;
                    hi = lo;
                }
                throw KernelError("small-jump first moment did not converge: (H0) suspect");
            }
        }
    }

  private:
    static void require_order(double beta) {
        if (!(beta > 0.0 && beta < 1.0)) throw KernelError("order beta must lie strictly in (0,1)");
    }
    static void require_weight(double w) {
        if (!(w > 0.0) || !std::isfinite(w)) throw KernelError("kernel weight must be positive");
    }

    KernelVariant variant_ = KernelVariant::ClassicalStable;
    double beta_ = 0.5;
    double tempering_ = 0.0;
    double weight_ = 1.0;
    std::function<double(double)> order_fn_;
    std::function<double(double, double)> custom_density_;
    std::function<double(double, double)> custom_tail_;
};

enum class JumpSide { TowardLower, TowardUpper };

/// Kernel pair of a two-sided operator. `plus` is the a-terminal (lower) kernel
/// and drives jumps toward a; `minus` is the b-terminal (upper) kernel and
/// drives jumps toward b. The combined-density accessor keeps the sign
/// convention nu(x,y) = plus(x,y) for y > 0 and minus(x,-y) for y < 0.
struct TwoSidedKernel {
    KernelSpec plus;
    KernelSpec minus;

    static TwoSidedKernel symmetric(KernelSpec k) { return {k, k}; }

    /// Standard symmetric beta-stable process: each side is the classical stable
    /// kernel scaled by 1/(2 cos(pi beta / 2)), so the two-sided generator has
    /// symbol -|xi|^beta and the closed-form exit identities apply directly.
    static TwoSidedKernel symmetric_stable(double beta) {
        const double w = 1.0 / (2.0 * std::cos(M_PI * beta / 2.0));
        return symmetric(KernelSpec::classical_stable(beta, w));
    }

    const KernelSpec& side(JumpSide s) const { return s == JumpSide::TowardLower ? plus : minus; }
};

/// Combined density nu(x, y), y != 0.
inline double eval_density(const TwoSidedKernel& k, double x, double y) {
    if (y == 0.0) throw std::domain_error("eval_density: y must be nonzero");
    return y > 0.0 ? k.plus.density(x, y) : k.minus.density(x, -y);
}

inline double tail_mass(const TwoSidedKernel& k, double x, double r, JumpSide side) {
    return k.side(side).tail_mass(x, r);
}

/// int_{|y| <= eps} |y| nu(x, y) dy, both sides summed.
inline double truncated_first_moment(const TwoSidedKernel& k, double x, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("truncated_first_moment: eps must be positive");
    return k.plus.segment_first_moment(x, 0.0, eps) + k.minus.segment_first_moment(x, 0.0, eps);
}

enum class CheckStatus { Pass, Fail, Inconclusive };

struct H0Report {
    CheckStatus status = CheckStatus::Inconclusive;
    double sup_first_moment = 0.0;   // sup_x int min{1,|y|} nu(x,y) dy over the grid
    std::vector<double> tightness;   // truncated first moment at eps = 1e-2, 1e-4
    std::string detail;
    bool pass() const { return status == CheckStatus::Pass; }
};

/// Numerical diagnostic for condition (H0): finiteness of the min{1,|y|} moment
/// over the grid and tightness of the small-jump moment as eps -> 0.
inline H0Report check_H0(const TwoSidedKernel& k, const std::vector<double>& grid) {
    if (grid.empty()) throw std::domain_error("check_H0: grid must be nonempty");
    H0Report rep;
    try {
        double sup = 0.0;
        for (double x : grid) {
            const double m = truncated_first_moment(k, x, 1.0) + tail_mass(k, x, 1.0, JumpSide::TowardLower) +
                             tail_mass(k, x, 1.0, JumpSide::TowardUpper);
            if (!std::isfinite(m)) {
                rep.status = CheckStatus::Fail;
                rep.detail = "non-finite min{1,|y|} moment";
                return rep;
            }
            sup = std::max(sup, m);
        }
        rep.sup_first_moment = sup;
        const double x0 = grid[grid.size() / 2];
        for (double eps : {1e-2, 1e-4}) rep.tightness.push_back(truncated_first_moment(k, x0, eps));
        const bool tight = rep.tightness[1] < rep.tightness[0] &&
                           rep.tightness[1] < 0.5 * rep.tightness[0] + 1e-12;
        rep.status = tight ? CheckStatus::Pass : CheckStatus::Fail;
        if (!tight) rep.detail = "small-jump moment does not vanish as eps -> 0";
    } catch (const KernelError& e) {
        rep.status = CheckStatus::Fail;
        rep.detail = e.what();
    } catch (const QuadratureError& e) {
        rep.status = CheckStatus::Inconclusive;
        rep.detail = e.what();
    }
    return rep;
}

struct H1Report {
    CheckStatus status = CheckStatus::Inconclusive;
    double fitted_C = 0.0;
    double fitted_q = 0.0;
    double residual = 0.0; // max abs log-space fit residual
    std::string detail;
    bool pass() const { return status == CheckStatus::Pass; }
};

/// Numerical check of condition (H1): fits m(eps) = int min(|y|,eps) nu dy at the
/// terminal on the outward side to C eps^q over the ladder eps = 2^-k, k = 4..20.
inline H1Report check_H1(const TwoSidedKernel& k, double a, double b) {
    if (!(a < b)) throw std::domain_error("check_H1: need a < b");
    H1Report rep;
    auto fit_side = [&](const KernelSpec& spec, double x, H1Report& r) -> bool {
        std::vector<double> le, lm;
        for (int kk = 4; kk <= 20; ++kk) {
            const double eps = std::ldexp(1.0, -kk);
            double m;
            try {
                m = spec.segment_first_moment(x, 0.0, eps) + eps * spec.tail_mass(x, eps);
            } catch (const KernelError& e) {
                r.detail = e.what();
                r.status = CheckStatus::Inconclusive;
                return false;
            }
            if (!(m > 0.0)) {
                r.detail = "m(eps) vanishes: no lower moment bound";
                r.status = CheckStatus::Fail;
                return false;
            }
            le.push_back(std::log(eps));
            lm.push_back(std::log(m));
        }
        const size_t n = le.size();
        double se = 0, sm = 0, see = 0, sem = 0;
        for (size_t i = 0; i < n; ++i) {
            se += le[i];
            sm += lm[i];
            see += le[i] * le[i];
            sem += le[i] * lm[i];
        }
        const double q = (n * sem - se * sm) / (n * see - se * se);
        const double logC = (sm - q * se) / n;
        double res = 0.0;
        for (size_t i = 0; i < n; ++i) res = std::max(res, std::fabs(lm[i] - (logC + q * le[i])));
        r.fitted_q = q;
        r.fitted_C = std::exp(logC);
        r.residual = std::max(r.residual, res);
        if (res > 0.2) {
            r.status = CheckStatus::Inconclusive;
            r.detail = "power-law fit residual too large";
            return false;
        }
        if (!(q > 0.0 && q < 1.0) || !(r.fitted_C > 0.0)) {
            r.status = CheckStatus::Fail;
            r.detail = "fitted exponent outside (0,1)";
            return false;
        }
        return true;
    };
    // Outward side at a is toward the lower terminal; at b toward the upper one.
    if (!fit_side(k.plus, a, rep)) return rep;
    if (!fit_side(k.minus, b, rep)) return rep;
    rep.status = CheckStatus::Pass;
    return rep;
}

} // namespace tsfrac
