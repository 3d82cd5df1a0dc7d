#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tsfrac/operators.hpp"

using namespace tsfrac;

namespace {

SmoothFunction make_fn(std::function<double(double)> f, double a, double b,
                       std::function<double(double)> d1 = nullptr) {
    return SmoothFunction(std::move(f), a, b, std::move(d1));
}

struct Battery {
    SmoothFunction fn;
    const char* name;
};

std::vector<Battery> battery(double a, double b) {
    std::vector<Battery> fns;
    fns.push_back({SmoothFunction([](double x) { return x; }, a, b,
                                  [](double) { return 1.0; }),
                   "identity"});
    fns.push_back({SmoothFunction([](double x) { return x * x; }, a, b,
                                  [](double x) { return 2.0 * x; }),
                   "square"});
    fns.push_back({SmoothFunction([](double x) { return x * x * x - x; }, a, b,
                                  [](double x) { return 3.0 * x * x - 1.0; }),
                   "cubic"});
    fns.push_back({SmoothFunction([](double x) { return std::exp(x); }, a, b,
                                  [](double x) { return std::exp(x); }),
                   "exp"});
    fns.push_back({SmoothFunction([](double x) { return std::sin(x); }, a, b,
                                  [](double x) { return std::cos(x); }),
                   "sin"});
    return fns;
}

} // namespace

TEST_CASE("operators annihilate constants") {
    auto k = KernelSpec::classical_stable(0.5);
    SmoothFunction c([](double) { return 3.7; }, 0.0, 1.0, [](double) { return 0.0; });
    for (double x : {0.1, 0.5, 0.9}) {
        CHECK(std::fabs(caputo_left(c, k, 0.0, x)) <= 1e-12);
        CHECK(std::fabs(caputo_right(c, k, 1.0, x)) <= 1e-12);
    }
}

TEST_CASE("empty-range convention at the terminals") {
    auto k = KernelSpec::classical_stable(0.5);
    SmoothFunction f([](double x) { return x * x; }, 0.0, 1.0, [](double x) { return 2.0 * x; });
    CHECK(caputo_left(f, k, 0.0, 0.0) == 0.0);
    CHECK(caputo_right(f, k, 1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(caputo_left(f, k, 0.0, -0.1), std::domain_error);
}

TEST_CASE("classical Caputo of the identity") {
    // D^{0.5} (x - a) at x - a = 1 is 1/Gamma(1.5)
    SmoothFunction f([](double x) { return x; }, 0.0, 2.0, [](double) { return 1.0; });
    const double v = classical_caputo(f, 0.5, 0.0, OperatorSide::Left, 1.0);
    CHECK(std::fabs(v - 1.0 / gamma_fn(1.5)) <= 1e-6);
    CHECK(std::fabs(v - 1.12838) <= 1e-5);
    CHECK_THROWS_AS(classical_caputo(f, 1.5, 0.0, OperatorSide::Left, 1.0), std::domain_error);
}

TEST_CASE("generator form matches the classical derivative (dual path)") {
    // caputo_left with the classical-stable kernel equals -D^beta for every
    // function in the battery
    const double a = 0.0, b = 2.0;
    for (double beta : {0.3, 0.5, 0.8}) {
        auto k = KernelSpec::classical_stable(beta);
        for (auto& item : battery(a, b)) {
            for (int i = 1; i <= 9; ++i) {
                const double x = a + (b - a) * i / 10.0;
                const double gen = caputo_left(item.fn, k, a, x);
                const double cls = classical_caputo(item.fn, beta, a, OperatorSide::Left, x);
                CHECK(std::fabs(gen + cls) <= 1e-8);
            }
        }
    }
}

TEST_CASE("right-sided generator matches the right classical derivative") {
    const double a = 0.0, b = 2.0;
    auto k = KernelSpec::classical_stable(0.6);
    for (auto& item : battery(a, b)) {
        for (double x : {0.4, 1.0, 1.6}) {
            const double gen = caputo_right(item.fn, k, b, x);
            const double cls = classical_caputo(item.fn, 0.6, b, OperatorSide::Right, x);
            CHECK(std::fabs(gen + cls) <= 1e-8);
        }
    }
}

TEST_CASE("RL and Caputo differ by the boundary-value tail term") {
    const double a = 0.0, b = 1.0;
    auto k = KernelSpec::classical_stable(0.5);
    SmoothFunction f([](double x) { return std::exp(x); }, a, b,
                     [](double x) { return std::exp(x); });
    for (double x : {0.2, 0.5, 0.8}) {
        const double shift_l = rl_left(f, k, a, x) - caputo_left(f, k, a, x);
        CHECK(std::fabs(shift_l + f(a) * k.tail_mass(x, x - a)) <= 1e-12);
        const double shift_r = rl_right(f, k, b, x) - caputo_right(f, k, b, x);
        CHECK(std::fabs(shift_r + f(b) * k.tail_mass(x, b - x)) <= 1e-12);
    }
    // functions vanishing at the terminal: the flavors coincide
    SmoothFunction z([](double x) { return x * (1.0 - x); }, a, b,
                     [](double x) { return 1.0 - 2.0 * x; });
    for (double x : {0.25, 0.75})
        CHECK(std::fabs(rl_left(z, k, a, x) - caputo_left(z, k, a, x)) <= 1e-12);
}

TEST_CASE("reflection identity for symmetric kernels") {
    const double a = -1.0, b = 1.0;
    auto k = KernelSpec::classical_stable(0.5);
    SmoothFunction f([](double x) { return std::exp(x); }, a, b,
                     [](double x) { return std::exp(x); });
    SmoothFunction fr([=](double x) { return std::exp(a + b - x); }, a, b,
                      [=](double x) { return -std::exp(a + b - x); });
    for (double x : {-0.6, 0.0, 0.4}) {
        const double right = caputo_right(f, k, b, x);
        const double left_reflected = caputo_left(fr, k, a, a + b - x);
        CHECK(std::fabs(right - left_reflected) <= 1e-9);
    }
}

TEST_CASE("linearity") {
    const double a = 0.0, b = 1.0;
    auto k = KernelSpec::classical_stable(0.4);
    SmoothFunction f([](double x) { return x * x; }, a, b, [](double x) { return 2.0 * x; });
    SmoothFunction g([](double x) { return std::sin(3.0 * x); }, a, b,
                     [](double x) { return 3.0 * std::cos(3.0 * x); });
    SmoothFunction fg([](double x) { return 2.0 * x * x - 0.5 * std::sin(3.0 * x); }, a, b,
                      [](double x) { return 4.0 * x - 1.5 * std::cos(3.0 * x); });
    for (double x : {0.3, 0.7}) {
        const double lhs = caputo_left(fg, k, a, x);
        const double rhs = 2.0 * caputo_left(f, k, a, x) - 0.5 * caputo_left(g, k, a, x);
        CHECK(std::fabs(lhs - rhs) <= 1e-10);
    }
}

TEST_CASE("diffusion part") {
    DiffusionCoefficients c;
    c.alpha = [](double) { return 1.0; };
    SmoothFunction sq([](double x) { return x * x; }, -1.0, 1.0, [](double x) { return 2.0 * x; },
                      [](double) { return 2.0; });
    CHECK(diffusion_apply(sq, c, 0.3) == 2.0);

    DiffusionCoefficients drift;
    drift.gamma = [](double x) { return x * (1.0 - x); };
    SmoothFunction lin([](double x) { return x; }, 0.0, 1.0, [](double) { return 1.0; },
                       [](double) { return 0.0; });
    CHECK(std::fabs(diffusion_apply(lin, drift, 0.5) - 0.25) <= 1e-15);

    // finite-difference fallback accuracy on sin
    SmoothFunction exact([](double x) { return std::sin(x); }, -1.0, 1.0,
                         [](double x) { return std::cos(x); },
                         [](double x) { return -std::sin(x); });
    SmoothFunction fallback([](double x) { return std::sin(x); }, -1.0, 1.0);
    CHECK_FALSE(fallback.exact_derivative());
    DiffusionCoefficients both;
    both.gamma = [](double) { return 1.0; };
    both.alpha = [](double) { return 1.0; };
    CHECK(std::fabs(diffusion_apply(exact, both, 0.4) - diffusion_apply(fallback, both, 0.4)) <=
          1e-5);
}

TEST_CASE("two-sided operator: flavor agreement and symmetry") {
    ProblemSpec spec;
    spec.a = -1.0;
    spec.b = 1.0;
    spec.kernel = TwoSidedKernel::symmetric(KernelSpec::classical_stable(0.5));

    SmoothFunction vanishing([](double x) { return (1.0 - x) * (1.0 + x); }, -1.0, 1.0,
                             [](double x) { return -2.0 * x; });
    for (double x : {-0.5, 0.0, 0.5}) {
        const double c = two_sided_apply(vanishing, spec, x, OperatorFlavor::Caputo);
        const double r = two_sided_apply(vanishing, spec, x, OperatorFlavor::RiemannLiouville);
        CHECK(std::fabs(c - r) <= 1e-12);
    }
    // even function on a symmetric setup: even values
    for (double x : {0.3, 0.7}) {
        const double plus = two_sided_apply(vanishing, spec, x, OperatorFlavor::Caputo);
        const double minus = two_sided_apply(vanishing, spec, -x, OperatorFlavor::Caputo);
        CHECK(std::fabs(plus - minus) <= 1e-9);
    }
    // constants are annihilated by the Caputo flavor
    SmoothFunction c([](double) { return 2.0; }, -1.0, 1.0, [](double) { return 0.0; });
    CHECK(std::fabs(two_sided_apply(c, spec, 0.2, OperatorFlavor::Caputo)) <= 1e-12);
}

TEST_CASE("generator-form sign at an interior maximum") {
    ProblemSpec spec;
    spec.a = -1.0;
    spec.b = 1.0;
    spec.kernel = TwoSidedKernel::symmetric(KernelSpec::classical_stable(0.5));
    SmoothFunction bump([](double x) { return 1.0 - x * x; }, -1.0, 1.0,
                        [](double x) { return -2.0 * x; });
    // strict interior maximum at 0: all difference terms are nonpositive
    CHECK(two_sided_apply(bump, spec, 0.0, OperatorFlavor::Caputo) <= 1e-12);
}

TEST_CASE("delta-split self-consistency") {
    // halving the split width must not move the value beyond tolerance; probe
    // by comparing against the independent classical path at several orders
    const double a = 0.0;
    SmoothFunction f([](double x) { return x * std::exp(-x); }, a, 3.0,
                     [](double x) { return (1.0 - x) * std::exp(-x); });
    for (double beta : {0.2, 0.5, 0.9}) {
        auto k = KernelSpec::classical_stable(beta);
        for (double x : {0.5, 1.5, 2.5}) {
            const double gen = caputo_left(f, k, a, x);
            const double cls = classical_caputo(f, beta, a, OperatorSide::Left, x);
            CHECK(std::fabs(gen + cls) <= 1e-8);
        }
    }
}

TEST_CASE("free generator") {
    ProblemSpec spec;
    spec.a = -1.0;
    spec.b = 1.0;
    spec.kernel = TwoSidedKernel::symmetric(KernelSpec::classical_stable(0.5));

    // constants vanish
    SmoothFunction c([](double) { return 5.0; }, -1.0, 1.0, [](double) { return 0.0; });
    CHECK(std::fabs(free_generator_apply(c, spec, 0.0)) <= 1e-9);

    // compactly supported bump inside (a,b): free and two-sided Caputo values
    // differ by at most the boundary tail masses times the sup norm
    auto bump_val = [](double x) {
        const double s = 1.0 - 4.0 * x * x;
        return s > 0.0 ? s * s : 0.0;
    };
    auto bump_d1 = [](double x) {
        const double s = 1.0 - 4.0 * x * x;
        return s > 0.0 ? -16.0 * x * s : 0.0;
    };
    SmoothFunction bump(bump_val, -1.0, 1.0, bump_d1);
    for (double x : {-0.2, 0.0, 0.3}) {
        const double free_v = free_generator_apply(bump, spec, x);
        const double two_v = two_sided_apply(bump, spec, x, OperatorFlavor::Caputo);
        const double bound = spec.kernel.plus.tail_mass(x, x - spec.a) +
                             spec.kernel.minus.tail_mass(x, spec.b - x);
        CHECK(std::fabs(free_v - two_v) <= bound + 1e-8);
    }
}
