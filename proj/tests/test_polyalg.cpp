#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hjbseries/polyalg.hpp"
#include "test_util.hpp"

using namespace hjb;

namespace {

Eigen::VectorXd vec1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

// scalar series from coefficients per degree, single variable
PolySeries scalar_1d(const std::vector<std::pair<int, double>>& terms, int trunc) {
    PolySeries s(1, 1, trunc);
    for (auto [d, c] : terms) {
        HomogeneousPoly h(1, d);
        h.coeffs[0] = c;
        s.add_part(0, h);
    }
    return s;
}

}  // namespace

TEST_CASE("enumerate_monomials: graded-lex order and counts") {
    auto m22 = enumerate_monomials(2, 2);
    REQUIRE(m22.size() == 3);
    CHECK(m22[0] == MultiIndex{2, 0});
    CHECK(m22[1] == MultiIndex{1, 1});
    CHECK(m22[2] == MultiIndex{0, 2});

    auto m14 = enumerate_monomials(1, 4);
    REQUIRE(m14.size() == 1);
    CHECK(m14[0] == MultiIndex{4});

    CHECK(enumerate_monomials(3, 2).size() == 6);

    // deterministic, rank consistent with position, count matches binomial
    for (int n = 1; n <= 4; ++n) {
        for (int d = 0; d <= 5; ++d) {
            auto ms = enumerate_monomials(n, d);
            CHECK(static_cast<long long>(ms.size()) == monomial_count(n, d));
            for (size_t k = 0; k < ms.size(); ++k)
                CHECK(monomial_rank(ms[k]) == static_cast<int>(k));
            CHECK(ms == enumerate_monomials(n, d));
        }
    }
}

TEST_CASE("eval") {
    auto s = scalar_1d({{2, 1.0}}, 4);
    CHECK(s.eval_scalar(vec1(0.5)) == doctest::Approx(0.25).epsilon(1e-14));

    auto prager_pi = scalar_1d({{2, 1.0}, {3, -1.0}, {4, 11.0 / 12.0}}, 4);
    CHECK(prager_pi.eval_scalar(vec1(1.0)) ==
          doctest::Approx(11.0 / 12.0).epsilon(1e-12));

    PolySeries z(3, 2, 4);
    Eigen::VectorXd x(3);
    x << 1.0, -2.0, 0.5;
    CHECK(z.eval(x).norm() == 0.0);
}

TEST_CASE("compose: hand oracles") {
    // outer y^2, inner 0.382 x  ->  0.145924 x^2
    auto outer = scalar_1d({{2, 1.0}}, 4);
    auto inner = scalar_1d({{1, 0.382}}, 4);
    auto r = compose(outer, inner, 4);
    CHECK(r.hom_part(0, 2).coeffs[0] == doctest::Approx(0.145924).epsilon(1e-12));
    CHECK(r.hom_part(0, 3).is_zero(1e-15));

    // outer y^2, inner x + x^2, trunc 3 -> x^2 + 2x^3 (hand expansion)
    auto inner2 = scalar_1d({{1, 1.0}, {2, 1.0}}, 3);
    auto r2 = compose(outer, inner2, 3);
    CHECK(r2.hom_part(0, 2).coeffs[0] == doctest::Approx(1.0));
    CHECK(r2.hom_part(0, 3).coeffs[0] == doctest::Approx(2.0));
    CHECK(r2.hom_part(0, 4).is_zero());

    // constant term in inner is rejected
    PolySeries bad(1, 1, 3);
    HomogeneousPoly c0(1, 0);
    c0.coeffs[0] = 0.5;
    bad.add_part(0, c0);
    CHECK_THROWS_AS(compose(outer, bad, 3), std::invalid_argument);
}

TEST_CASE("compose with identity leaves series unchanged (random)") {
    std::mt19937 rng(123);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 1 + rep % 3;
        auto s = testutil::random_series(rng, n, 2, 1, 4);
        auto r = compose(s, identity_series(n, 4), 4);
        for (int c = 0; c < 2; ++c)
            for (int d = 1; d <= 4; ++d)
                CHECK((r.hom_part(c, d).coeffs - s.hom_part(c, d).coeffs)
                          .lpNorm<Eigen::Infinity>() < 1e-13);
    }
}

TEST_CASE("grad") {
    auto s = scalar_1d({{2, 1.0}}, 4);
    auto g = grad(s);
    CHECK(g.hom_part(0, 1).coeffs[0] == doctest::Approx(2.0));

    Eigen::MatrixXd P(2, 2);
    P << 2, 0, 0, 4;
    auto q = quadratic_form_series(P, 4);
    auto gq = grad(q);
    Eigen::VectorXd x(2);
    x << 1.0, 1.0;
    Eigen::VectorXd gv = gq.eval(x);
    CHECK(gv[0] == doctest::Approx(2.0));
    CHECK(gv[1] == doctest::Approx(4.0));

    auto s2 = scalar_1d({{2, 1.0}, {3, -1.0}}, 4);
    auto g2 = grad(s2);
    CHECK(g2.hom_part(0, 1).coeffs[0] == doctest::Approx(2.0));
    CHECK(g2.hom_part(0, 2).coeffs[0] == doctest::Approx(-3.0));
}

TEST_CASE("grad of degree-d part has degree d-1 (random)") {
    std::mt19937 rng(7);
    auto s = testutil::random_series(rng, 3, 1, 1, 5);
    for (int d = 1; d <= 5; ++d) {
        PolySeries part(3, 1, 5);
        part.add_part(0, s.hom_part(0, d));
        auto g = grad(part);
        for (int c = 0; c < 3; ++c) {
            for (const auto& [dd, h] : g.comps[c]) {
                if (!h.is_zero()) CHECK(dd == d - 1);
            }
        }
    }
}

TEST_CASE("hom_part") {
    auto s = scalar_1d({{2, 1.0}, {3, 1.0}}, 5);
    CHECK(s.hom_part(0, 3).coeffs[0] == doctest::Approx(1.0));
    CHECK(s.hom_part(0, 5).is_zero());

    // Prager dynamics f = u + xu over vars (x,u): degree-2 part is the xu term
    PolySeries f(2, 1, 3);
    HomogeneousPoly f1(2, 1);
    f1.coeff(MultiIndex{0, 1}) = 1.0;
    HomogeneousPoly f2(2, 2);
    f2.coeff(MultiIndex{1, 1}) = 1.0;
    f.add_part(0, f1);
    f.add_part(0, f2);
    auto h2 = f.hom_part(0, 2);
    CHECK(h2.coeff(MultiIndex{1, 1}) == doctest::Approx(1.0));
    CHECK(h2.coeff(MultiIndex{2, 0}) == 0.0);
    CHECK(h2.coeff(MultiIndex{0, 2}) == 0.0);
}

TEST_CASE("composition evaluation order of accuracy") {
    // eval(compose(F,G), x) == eval(F, eval(G,x)) + O(|x|^{trunc+1})
    std::mt19937 rng(42);
    const int trunc = 3;
    auto F = testutil::random_series(rng, 2, 1, 1, trunc, 0.5);
    auto G = testutil::random_series(rng, 2, 2, 1, trunc, 0.5);
    auto FG = compose(F, G, trunc);

    std::vector<double> scales, errs;
    Eigen::VectorXd dir(2);
    dir << 0.6, -0.8;
    for (double p = 1.0; p <= 3.01; p += 0.5) {
        const double eps = std::pow(10.0, -p);
        Eigen::VectorXd x = eps * dir;
        const double direct = FG.eval_scalar(x);
        const double nested = F.eval_scalar(G.eval(x));
        scales.push_back(eps);
        errs.push_back(std::abs(direct - nested));
    }
    CHECK(testutil::loglog_slope(scales, errs) >= trunc + 0.5);
}

TEST_CASE("series_mul and partial consistency (random)") {
    std::mt19937 rng(99);
    auto a = testutil::random_series(rng, 2, 1, 1, 3);
    auto b = testutil::random_series(rng, 2, 1, 1, 3);
    auto ab = series_mul(a, b, 6);
    Eigen::VectorXd x(2);
    x << 0.3, -0.2;
    CHECK(ab.eval_scalar(x) ==
          doctest::Approx(a.eval_scalar(x) * b.eval_scalar(x)).epsilon(1e-12));

    // product rule: d(ab) = da*b + a*db
    auto d_ab = series_partial(ab, 0);
    auto rhs = series_add(series_mul(series_partial(a, 0), b, 6),
                          series_mul(a, series_partial(b, 0), 6));
    CHECK(d_ab.eval(x)[0] == doctest::Approx(rhs.eval(x)[0]).epsilon(1e-12));
}

TEST_CASE("implicit_series and invert_series") {
    // X(z) = z + z^2 over 1 variable; z(x) should satisfy X(z(x)) = x
    auto X = scalar_1d({{1, 1.0}, {2, 1.0}}, 5);
    auto Z = invert_series(X, 5);
    auto XZ = compose(X, Z, 5);
    CHECK(XZ.hom_part(0, 1).coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int d = 2; d <= 5; ++d) CHECK(XZ.hom_part(0, d).is_zero(1e-12));

    // known expansion: z = x - x^2 + 2x^3 - 5x^4 + ... (Catalan signs)
    CHECK(Z.hom_part(0, 2).coeffs[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(Z.hom_part(0, 3).coeffs[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(Z.hom_part(0, 4).coeffs[0] == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("embed_vars keeps values") {
    std::mt19937 rng(5);
    auto a = testutil::random_series(rng, 2, 1, 1, 3);
    auto e = embed_vars(a, 4, {3, 1});
    Eigen::VectorXd x(2), y(4);
    x << 0.4, -0.7;
    y << 0.0, -0.7, 0.0, 0.4;
    CHECK(a.eval_scalar(x) == doctest::Approx(e.eval_scalar(y)).epsilon(1e-13));
}
