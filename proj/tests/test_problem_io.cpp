#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hjbseries/albrecht.hpp"
#include "hjbseries/problem_io.hpp"

using namespace hjb;

namespace {

const char* kPragerJson = R"json({
  "name": "prager",
  "mode": "continuous",
  "n": 1, "m": 1,
  "f_degree": 3, "l_degree": 4,
  "affine1d": {
    "g0": "0", "g1": "x+1",
    "l0": "ln(1+x)^2", "l1": "0", "l2": "1",
    "domain": [-1.0, 4.0]
  },
  "exact": { "pi": "ln(1+x)^2", "kappa": "-ln(1+x)" }
})json";

const char* kSeriesJson = R"json({
  "name": "lq",
  "mode": "discrete",
  "n": 1, "m": 1,
  "f_degree": 2, "l_degree": 3,
  "dynamics": [
    {"component": 0, "alpha": [1], "beta": [0], "value": 1.0},
    {"component": 0, "alpha": [0], "beta": [1], "value": 1.0}
  ],
  "cost": [
    {"alpha": [2], "beta": [0], "value": 0.5},
    {"alpha": [0], "beta": [2], "value": 0.5}
  ]
})json";

}  // namespace

TEST_CASE("Prager file: affine section auto-derives the series") {
    auto lp = load_problem_text(kPragerJson);
    REQUIRE(lp.affine.has_value());
    REQUIRE(lp.control.has_value());
    auto lqr = lp.control->extract_lqr();
    CHECK(lqr.Q(0, 0) == doctest::Approx(2.0));
    CHECK(lqr.R(0, 0) == doctest::Approx(2.0));
    CHECK(lqr.S(0, 0) == doctest::Approx(0.0));
    CHECK(lp.control->l.hom_part(0, 3).coeff(MultiIndex{3, 0}) ==
          doctest::Approx(-1.0));
    CHECK(lp.control->l.hom_part(0, 4).coeff(MultiIndex{4, 0}) ==
          doctest::Approx(11.0 / 12.0));
    CHECK_FALSE(lp.log.empty());
    REQUIRE(lp.exact_pi.has_value());
    CHECK(lp.exact_pi->eval(1.0) ==
          doctest::Approx(std::log(2.0) * std::log(2.0)).epsilon(1e-14));

    // the derived problem solves to the known coefficients
    auto sol = solve_hjb_series(*lp.control, 4);
    CHECK(sol.pi.hom_part(0, 4).coeffs[0] == doctest::Approx(11.0 / 12.0).epsilon(1e-11));
}

TEST_CASE("series-only file loads and validates") {
    auto lp = load_problem_text(kSeriesJson);
    REQUIRE(lp.control.has_value());
    CHECK_FALSE(lp.affine.has_value());
    CHECK(lp.control->mode == Mode::Discrete);
    auto lqr = lp.control->extract_lqr();
    CHECK(lqr.A(0, 0) == doctest::Approx(1.0));
    CHECK(lqr.Q(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("structured load errors") {
    // empty dynamics: A, B missing
    CHECK_THROWS_WITH_AS(load_problem_text(R"json({"name":"x","mode":"discrete",
        "n":1,"m":1,"cost":[{"alpha":[2],"beta":[0],"value":1.0},
        {"alpha":[0],"beta":[2],"value":0.5}]})json"),
                         doctest::Contains("A,B missing"), std::invalid_argument);

    // R not positive definite, offending eigenvalue named
    try {
        load_problem_text(R"json({"name":"x","mode":"discrete","n":1,"m":1,
            "dynamics":[{"component":0,"alpha":[1],"beta":[0],"value":0.5},
                        {"component":0,"alpha":[0],"beta":[1],"value":1.0}],
            "cost":[{"alpha":[2],"beta":[0],"value":1.0},
                    {"alpha":[0],"beta":[2],"value":-0.5}]})json");
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("R not positive definite") !=
              std::string::npos);
        CHECK(std::string(e.what()).find("-1") != std::string::npos);
    }

    // malformed JSON
    CHECK_THROWS_AS(load_problem_text("{ not json"), ParseError);
    // negative exponent
    CHECK_THROWS_AS(load_problem_text(R"json({"name":"x","n":1,"m":1,
        "dynamics":[{"component":0,"alpha":[-1],"beta":[1],"value":1.0}]})json"),
                    ParseError);
    // affine/series inconsistency
    CHECK_THROWS_AS(load_problem_text(R"json({"name":"x","mode":"continuous",
        "n":1,"m":1,"f_degree":2,"l_degree":3,
        "dynamics":[{"component":0,"alpha":[1],"beta":[0],"value":9.0},
                    {"component":0,"alpha":[0],"beta":[1],"value":1.0}],
        "cost":[{"alpha":[2],"beta":[0],"value":1.0},
                {"alpha":[0],"beta":[2],"value":1.0}],
        "affine1d":{"g0":"0","g1":"x+1","l0":"ln(1+x)^2","l1":"0","l2":"1",
                    "domain":[-1.0,4.0]}})json"),
                    std::invalid_argument);
}

TEST_CASE("canonical save/load round trip") {
    auto f1 = parse_problem_text(kPragerJson);
    const std::string s1 = save_problem(f1);
    auto f2 = parse_problem_text(s1);
    const std::string s2 = save_problem(f2);
    CHECK(s1 == s2);

    auto g1 = parse_problem_text(kSeriesJson);
    const std::string t1 = save_problem(g1);
    auto g2 = parse_problem_text(t1);
    CHECK(t1 == save_problem(g2));
}

#ifdef HJB_CLI_PATH
TEST_CASE("CLI smoke: series, pencil and patch1d on the Prager file") {
    const std::string dir = "cli_smoke_out";
    (void)!std::system(("rm -rf " + dir).c_str());
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/prager.json");
        f << kPragerJson;
    }
    const std::string cli = HJB_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + dir + "/prager.json --out " + dir +
                                " " + args + " > " + dir + "/stdout.txt 2>&1";
        return std::system(cmd.c_str());
    };
    CHECK(run("series --degree 4") == 0);
    CHECK(std::filesystem::exists(dir + "/prager_series_coeffs.csv"));
    CHECK(std::filesystem::exists(dir + "/prager_run.log"));
    CHECK(run("pencil") == 0);
    CHECK(run("lyap --degree 4 --eps 0.015625 --box 0 4 --mesh 128") == 0);
    CHECK(run("patch1d --degree 3 --eps 0.015625 --mesh 256") == 0);
    CHECK(std::filesystem::exists(dir + "/prager_patch.csv"));

    // identical runs produce identical CSVs
    (void)!std::system(("cp " + dir + "/prager_patch.csv " + dir + "/first.csv").c_str());
    CHECK(run("patch1d --degree 3 --eps 0.015625 --mesh 256") == 0);
    CHECK(std::system(("cmp -s " + dir + "/prager_patch.csv " + dir + "/first.csv")
                          .c_str()) == 0);

    // error classes: parse failure -> exit 2
    {
        std::ofstream f(dir + "/broken.json");
        f << "{ nope";
    }
    const int rc = std::system(
        (cli + " " + dir + "/broken.json series > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(rc) == 2);
}
#endif
