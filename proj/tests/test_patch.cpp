#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hjbseries/albrecht.hpp"
#include "hjbseries/patch.hpp"

using namespace hjb;

namespace {

AffineProblem1D prager() {
    AffineProblem1D p;
    p.g0 = Expr::parse("0");
    p.g1 = Expr::parse("x+1");
    p.l0 = Expr::parse("ln(1+x)^2");
    p.l1 = Expr::parse("0");
    p.l2 = Expr::parse("1");
    p.dom_lo = -1.0;
    p.dom_hi = 4.0;
    return p;
}

// xdot = -x + u, l = x^2 + u^2: exact LQ over the whole line
AffineProblem1D stable_lq() {
    AffineProblem1D p;
    p.g0 = Expr::parse("-x");
    p.g1 = Expr::parse("1");
    p.l0 = Expr::parse("x^2");
    p.l1 = Expr::parse("0");
    p.l2 = Expr::parse("1");
    p.dom_lo = -2.0;
    p.dom_hi = 2.0;
    return p;
}

double prager_pi_star(double x) {
    const double s = std::log(1.0 + x);
    return s * s;
}
double prager_pi_star_prime(double x) { return 2.0 * std::log(1.0 + x) / (1.0 + x); }
double prager_kappa_star(double x) { return -std::log(1.0 + x); }

}  // namespace

TEST_CASE("problem validation") {
    auto p = prager();
    p.validate(128);

    auto bad = prager();
    bad.l0 = Expr::parse("x");  // l0'(0) != 0
    CHECK_THROWS_AS(bad.validate(64), std::invalid_argument);

    auto bad2 = prager();
    bad2.g0 = Expr::parse("1+x");  // g0(0) != 0
    CHECK_THROWS_AS(bad2.validate(64), std::invalid_argument);

    auto bad3 = prager();
    bad3.l2 = Expr::parse("x");  // not positive on the mesh
    CHECK_THROWS_AS(bad3.validate(64), std::invalid_argument);
}

TEST_CASE("series form of the affine problem") {
    auto p = prager();
    ControlProblem cp = p.to_control_problem(4);
    cp.validate();
    auto lqr = cp.extract_lqr();
    CHECK(lqr.A(0, 0) == doctest::Approx(0.0));
    CHECK(lqr.B(0, 0) == doctest::Approx(1.0));
    CHECK(lqr.Q(0, 0) == doctest::Approx(2.0));
    CHECK(lqr.R(0, 0) == doctest::Approx(2.0));
    CHECK(cp.l.hom_part(0, 3).coeff(MultiIndex{3, 0}) == doctest::Approx(-1.0));
    CHECK(cp.l.hom_part(0, 4).coeff(MultiIndex{4, 0}) ==
          doctest::Approx(11.0 / 12.0));
}

TEST_CASE("taylor_at_point reproduces the exact jets from exact data") {
    auto p = prager();
    for (double xbar : {0.5, 1.0, 2.5, -0.5}) {
        const double pi0 = prager_pi_star(xbar);
        const double pi1 = prager_pi_star_prime(xbar);
        const double k0 = prager_kappa_star(xbar);
        Patch pc = taylor_at_point(p, xbar, pi0, pi1, k0, 3);

        // oracle: jets of the closed-form solution via expression jets
        const jets::Jet pi_star = Expr::parse("ln(1+x)^2").jet(xbar, 4);
        const jets::Jet ka_star = Expr::parse("-ln(1+x)").jet(xbar, 3);
        for (int k = 0; k <= 4; ++k)
            CHECK(std::abs(pc.pi_jet[k] - pi_star[k]) <=
                  1e-9 * (1.0 + std::abs(pi_star[k])));
        for (int k = 0; k <= 3; ++k)
            CHECK(std::abs(pc.kappa_jet[k] - ka_star[k]) <=
                  1e-9 * (1.0 + std::abs(ka_star[k])));
    }
}

TEST_CASE("second-derivative recursion matches the legacy closed form") {
    // with the kappa' placeholder zeroed, pi'' at xbar must equal
    //   (-1/f) * ( pi' * kappa + 2 ln(1+xbar)/(1+xbar) )
    auto p = prager();
    const double a = 0.7;
    const double pi1 = prager_pi_star_prime(a);
    const double k1 = prager_kappa_star(a);
    Patch pc = taylor_at_point(p, a, prager_pi_star(a), pi1, k1, 3);
    const double f = a * k1 + k1;
    const double p3 = (-1.0 / f) * (pi1 * k1 + 2.0 * std::log(a + 1.0) / (a + 1.0));
    CHECK(2.0 * pc.pi_jet[2] == doctest::Approx(p3).epsilon(1e-10));
}

TEST_CASE("taylor_at_point rejections") {
    auto p = prager();
    // equilibrium: f(0, 0) = 0, marching cannot start here
    CHECK_THROWS_AS(taylor_at_point(p, 0.0, 0.0, 0.0, 0.0, 3),
                    CharacteristicPointError);
    // gradient-equation violation in the data
    CHECK_THROWS_AS(taylor_at_point(p, 0.5, prager_pi_star(0.5),
                                    prager_pi_star_prime(0.5), 1.0, 3),
                    std::invalid_argument);
}

TEST_CASE("glue semantics") {
    auto p = prager();
    Patch a = taylor_at_point(p, 0.5, prager_pi_star(0.5),
                              prager_pi_star_prime(0.5), prager_kappa_star(0.5), 3);
    a.lo = 0.4;
    a.hi = 1.0;
    PatchedSolution sol{{a}};

    // identical patch: values unchanged
    auto sol2 = glue(sol, a);
    CHECK(sol2.pi(0.7) == doctest::Approx(sol.pi(0.7)));

    // shifted-up copy loses to the incumbent on the overlap
    Patch b = a;
    b.pi_jet[0] += 1.0;
    auto sol3 = glue(sol, b);
    CHECK(sol3.pi(0.7) == doctest::Approx(sol.pi(0.7)));
    CHECK(&sol3.winner(0.7) != &sol3.patches[1]);

    // disjoint intervals are rejected
    Patch c = a;
    c.lo = 2.0;
    c.hi = 3.0;
    CHECK_THROWS_AS(glue(sol, c), std::invalid_argument);
}

TEST_CASE("march on the Prager problem, positive ray") {
    auto p = prager();
    MarchOptions opt;
    opt.degree = 3;
    opt.eps1 = opt.eps2 = std::pow(2.0, -6);
    opt.mesh = 256;
    opt.direction = +1;
    opt.max_patches = 8;
    auto res = march(p, opt);

    REQUIRE_FALSE(res.boundaries.empty());
    // boundaries strictly increase along the ray
    for (size_t i = 1; i < res.boundaries.size(); ++i)
        CHECK(res.boundaries[i] > res.boundaries[i - 1]);

    // the patched solution beats the origin series wherever the origin series
    // has left its certified region, and decisively at the domain edge
    SeriesSolution origin = solve_hjb_series(p.to_control_problem(4), 4);
    const double first = res.boundaries.front();
    double worst_patch = 0.0, worst_origin = 0.0;
    for (int k = 0; k <= 256; ++k) {
        const double x = 4.0 * k / 256;
        if (x <= first) continue;
        Eigen::VectorXd xv(1);
        xv << x;
        const double e_patch = std::abs(res.solution.pi(x) - prager_pi_star(x));
        const double e_origin = std::abs(origin.pi.eval_scalar(xv) - prager_pi_star(x));
        worst_patch = std::max(worst_patch, e_patch);
        worst_origin = std::max(worst_origin, e_origin);
    }
    CHECK(worst_patch < worst_origin);
    const double e_edge_patch = std::abs(res.solution.pi(4.0) - prager_pi_star(4.0));
    Eigen::VectorXd x4(1);
    x4 << 4.0;
    const double e_edge_origin =
        std::abs(origin.pi.eval_scalar(x4) - prager_pi_star(4.0));
    CHECK(e_edge_patch < 0.1 * e_edge_origin);

    // determinism
    auto res2 = march(p, opt);
    CHECK(res2.boundaries == res.boundaries);
    CHECK(res2.stop_reason == res.stop_reason);
}

TEST_CASE("march on the Prager problem, negative ray") {
    auto p = prager();
    MarchOptions opt;
    opt.degree = 3;
    opt.eps1 = opt.eps2 = std::pow(2.0, -6);
    opt.mesh = 256;
    opt.direction = -1;
    opt.max_patches = 6;
    auto res = march(p, opt);
    REQUIRE_FALSE(res.boundaries.empty());
    for (size_t i = 1; i < res.boundaries.size(); ++i)
        CHECK(res.boundaries[i] < res.boundaries[i - 1]);
    CHECK(res.boundaries.front() < 0.0);
    // never steps past the open end of the domain
    for (double b : res.boundaries) CHECK(b > -1.0);
    // each new patch keeps the value function finite and positive on its reach
    for (double x = -0.9; x < 0.0; x += 0.05) CHECK(res.solution.pi(x) > 0.0);
}

TEST_CASE("march on an exact LQ problem stops at the edge with one patch") {
    auto p = stable_lq();
    MarchOptions opt;
    opt.degree = 3;
    opt.eps1 = opt.eps2 = 0.01;
    opt.mesh = 128;
    opt.direction = +1;
    auto res = march(p, opt);
    CHECK(res.boundaries.empty());
    CHECK(res.stop_reason == "edge");
    REQUIRE(res.solution.patches.size() == 1);
    // the single patch is the exact quadratic cost
    for (double x = 0.0; x <= 2.0; x += 0.25) {
        const double pstar = (std::sqrt(2.0) - 1.0) * x * x;  // P from the CARE
        CHECK(res.solution.pi(x) == doctest::Approx(pstar).epsilon(1e-8));
    }
}

TEST_CASE("patched residual does not exceed the origin residual outside the core") {
    auto p = prager();
    MarchOptions opt;
    opt.degree = 3;
    opt.eps1 = opt.eps2 = std::pow(2.0, -6);
    opt.mesh = 256;
    opt.direction = +1;
    opt.max_patches = 8;
    auto res = march(p, opt);
    SeriesSolution origin = solve_hjb_series(p.to_control_problem(4), 4);

    auto residual_of = [&](double x, double piprime, double kap) {
        return piprime * p.f(x, kap) + p.l(x, kap);
    };
    const double first = res.boundaries.front();
    for (int k = 1; k <= 256; ++k) {
        const double x = 4.0 * k / 256;
        if (x <= first) continue;
        Eigen::VectorXd xv(1);
        xv << x;
        const double r_patch = std::abs(
            residual_of(x, res.solution.pi_prime(x), res.solution.kappa(x)));
        const double r_origin =
            std::abs(residual_of(x, grad(origin.pi).eval(xv)[0],
                                 origin.kappa.eval(xv)[0]));
        CHECK(r_patch <= r_origin + 1e-12);
    }
}
