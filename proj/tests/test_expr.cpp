#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hjbseries/expr.hpp"

using namespace hjb;

TEST_CASE("jet golden values") {
    Expr e = Expr::ln(Expr::constant(1.0) + Expr::var());

    auto j0 = e.jet(0.0, 3);  // Mercator series
    CHECK(j0[0] == doctest::Approx(0.0));
    CHECK(j0[1] == doctest::Approx(1.0));
    CHECK(j0[2] == doctest::Approx(-0.5));
    CHECK(j0[3] == doctest::Approx(1.0 / 3.0));

    auto j1 = e.jet(1.0, 2);  // hand differentiation at xbar = 1
    CHECK(j1[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(j1[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(j1[2] == doctest::Approx(-0.125).epsilon(1e-14));

    auto jc = Expr::constant(5.0).jet(0.7, 4);
    CHECK(jc[0] == doctest::Approx(5.0));
    for (int k = 1; k <= 4; ++k) CHECK(jc[k] == 0.0);
}

TEST_CASE("parser") {
    // function application binds before the power: (ln(1+x))^2
    Expr e = Expr::parse("ln(1+x)^2");
    auto j = e.jet(0.0, 4);
    CHECK(j[0] == doctest::Approx(0.0));
    CHECK(j[1] == doctest::Approx(0.0));
    CHECK(j[2] == doctest::Approx(1.0));
    CHECK(j[3] == doctest::Approx(-1.0));
    CHECK(j[4] == doctest::Approx(11.0 / 12.0));

    CHECK(Expr::parse("x+1").eval(0.5) == doctest::Approx(1.5));
    CHECK(Expr::parse("0").eval(2.0) == doctest::Approx(0.0));
    CHECK(Expr::parse("2*x^3 - x/2").eval(2.0) == doctest::Approx(15.0));
    CHECK(Expr::parse("-x^2").eval(3.0) == doctest::Approx(-9.0));
    CHECK(Expr::parse("exp(sin(x)*cos(x))").eval(0.3) ==
          doctest::Approx(std::exp(std::sin(0.3) * std::cos(0.3))).epsilon(1e-14));
    CHECK(Expr::parse(" ( 1 + x ) ^ 2 ").eval(2.0) == doctest::Approx(9.0));

    CHECK_THROWS_AS(Expr::parse("foo(x)"), std::invalid_argument);
    CHECK_THROWS_AS(Expr::parse("1 +"), std::invalid_argument);
    CHECK_THROWS_AS(Expr::parse("x^y"), std::invalid_argument);
    CHECK_THROWS_AS(Expr::parse("(1+x"), std::invalid_argument);
    CHECK_THROWS_AS(Expr::parse("1 2"), std::invalid_argument);
}

TEST_CASE("domain violations throw, never silent NaN") {
    Expr e = Expr::parse("ln(1+x)");
    CHECK_THROWS_AS(e.eval(-1.0), ExprDomainError);
    CHECK_THROWS_AS(e.eval(-2.0), ExprDomainError);
    CHECK_THROWS_AS(e.jet(-1.5, 3), ExprDomainError);

    Expr d = Expr::parse("1/x");
    CHECK_THROWS_AS(d.eval(0.0), ExprDomainError);
    CHECK(d.eval(4.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(Expr::parse("x^-1").eval(0.0), ExprDomainError);
    CHECK(Expr::parse("x^-2").eval(2.0) == doctest::Approx(0.25));
}

TEST_CASE("jets match central finite differences") {
    const std::vector<std::string> exprs = {
        "ln(1+x)^2", "exp(-x)*sin(x)", "(x+1)/(x^2+2)", "cos(2*x) + x^4"};
    for (const auto& src : exprs) {
        Expr e = Expr::parse(src);
        const double xbar = 0.3;
        auto j = e.jet(xbar, 4);
        const double h = 1e-2;
        auto f = [&](double t) { return e.eval(t); };
        // 4th-order first/second stencils; Richardson-extrapolated third/fourth
        const double d1 =
            (f(xbar - 2 * h) - 8 * f(xbar - h) + 8 * f(xbar + h) - f(xbar + 2 * h)) /
            (12 * h);
        const double d2 = (-f(xbar - 2 * h) + 16 * f(xbar - h) - 30 * f(xbar) +
                           16 * f(xbar + h) - f(xbar + 2 * h)) /
                          (12 * h * h);
        auto d3h = [&](double hh) {
            return (f(xbar + 2 * hh) - 2 * f(xbar + hh) + 2 * f(xbar - hh) -
                    f(xbar - 2 * hh)) /
                   (2 * hh * hh * hh);
        };
        auto d4h = [&](double hh) {
            return (f(xbar - 2 * hh) - 4 * f(xbar - hh) + 6 * f(xbar) -
                    4 * f(xbar + hh) + f(xbar + 2 * hh)) /
                   (hh * hh * hh * hh);
        };
        const double d3 = (4.0 * d3h(h / 2) - d3h(h)) / 3.0;
        const double d4 = (4.0 * d4h(h / 2) - d4h(h)) / 3.0;
        const std::vector<double> fd = {d1, d2, d3, d4};
        double fact = 1.0;
        for (int k = 1; k <= 4; ++k) {
            fact *= k;
            const double jet_deriv = j[k] * fact;
            CHECK(std::abs(jet_deriv - fd[k - 1]) <=
                  1e-5 * (1.0 + std::abs(jet_deriv)));
        }
    }
}

TEST_CASE("jet evaluation matches direct evaluation") {
    Expr e = Expr::parse("exp(-x) * (1+x)^3 / (2 + sin(x))");
    const double xbar = 0.2;
    auto j = e.jet(xbar, 8);
    for (double dx : {1e-2, 5e-3, -1e-2}) {
        const double approx = jets::eval(j, dx);
        const double exact = e.eval(xbar + dx);
        CHECK(std::abs(approx - exact) <= 1e-12 * (1.0 + std::abs(exact)));
    }
}
