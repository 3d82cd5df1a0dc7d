#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tsfrac/expr.hpp"
#include "tsfrac/quadrature.hpp"

using namespace tsfrac;

TEST_CASE("adaptive quadrature on smooth integrands") {
    QuadResult r = adaptive_quad([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 1.0 / 3.0) <= 1e-12);

    r = adaptive_quad([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 2.0) <= 1e-10);

    r = adaptive_quad([](double x) { return std::exp(-x); }, 0.0, 10.0);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - (1.0 - std::exp(-10.0))) <= 1e-10);

    // empty interval
    r = adaptive_quad([](double) { return 1.0; }, 2.0, 2.0);
    CHECK(r.value == 0.0);
}

TEST_CASE("adaptive quadrature handles an integrable near-singularity") {
    // int_eps^1 x^{-1/2} dx = 2(1 - sqrt(eps))
    const double eps = 1e-10;
    QuadResult r = adaptive_quad([](double x) { return 1.0 / std::sqrt(x); }, eps, 1.0, 1e-9,
                                 1 << 18);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 2.0 * (1.0 - std::sqrt(eps))) <= 1e-7);
}

TEST_CASE("quad_to_infinity") {
    QuadResult r = quad_to_infinity([](double y) { return std::exp(-y); }, 0.5);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - std::exp(-0.5)) <= 1e-9);

    // int_1^inf y^{-3/2} dy = 2
    r = quad_to_infinity([](double y) { return std::pow(y, -1.5); }, 1.0);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 2.0) <= 1e-6);

    // divergent tail is flagged, not silently summed
    r = quad_to_infinity([](double y) { return 1.0 / std::sqrt(y); }, 1.0);
    CHECK_FALSE(r.converged);
}

TEST_CASE("expression grammar") {
    Expression p("2*x^2 - 3*x + 1");
    CHECK(p(0.0) == 1.0);
    CHECK(p(1.0) == 0.0);
    CHECK(p(2.0) == 3.0);

    CHECK(Expression("2 + 3*4")(0.0) == 14.0);
    CHECK(Expression("(2 + 3)*4")(0.0) == 20.0);
    CHECK(Expression("2^3^2")(0.0) == 512.0); // right-associative power
    CHECK(Expression("-x^2")(3.0) == -9.0);   // unary minus binds the whole power
    CHECK(std::fabs(Expression("exp(x)")(1.0) - M_E) <= 1e-15);
    CHECK(std::fabs(Expression("sin(x)^2 + cos(x)^2")(0.7) - 1.0) <= 1e-15);
    CHECK(Expression("abs(-3 + x)")(1.0) == 2.0);
    CHECK(Expression("x/4")(2.0) == 0.5);
    CHECK(Expression(" 1.5e2 ")(0.0) == 150.0);
}

TEST_CASE("expression errors carry positions") {
    CHECK_THROWS_AS(Expression("2*"), ExprParseError);
    CHECK_THROWS_AS(Expression("foo(x)"), ExprParseError);
    CHECK_THROWS_AS(Expression("(1+2"), ExprParseError);
    CHECK_THROWS_AS(Expression("1 2"), ExprParseError);
    try {
        Expression("1 + bar(x)");
        CHECK(false);
    } catch (const ExprParseError& e) {
        CHECK(e.position == 4);
    }
}

TEST_CASE("expression retains its source text") {
    Expression p("x^2 + 1");
    CHECK(p.text() == "x^2 + 1");
    auto f = p.as_function();
    CHECK(f(3.0) == 10.0);
    // re-parse of the retained text reproduces the values
    Expression q(p.text());
    for (double x : {-2.0, 0.0, 1.5}) CHECK(p(x) == q(x));
}
