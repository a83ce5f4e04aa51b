// Problem-file ingestion and canonical serialization.  Files are JSON: a
// header, monomial-coefficient lists for the dynamics and cost, an optional
// affine-in-u section with expression strings, and optional closed-form
// solutions for validation.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjbseries/dpe.hpp"
#include "hjbseries/patch.hpp"

namespace hjb {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProblemFile {
    std::string name;
    Mode mode = Mode::Continuous;
    int n = 1;
    int m = 1;
    int f_degree = 3;  // highest dynamics degree carried
    int l_degree = 4;  // highest cost degree carried

    struct Entry {
        int component = 0;  // output index (dynamics only)
        MultiIndex alpha;   // x exponents
        MultiIndex beta;    // u exponents
        double value = 0.0;
    };
    std::vector<Entry> dynamics;
    std::vector<Entry> cost;

    struct Affine1D {
        bool present = false;
        std::string g0, g1, l0, l1, l2;
        double dom_lo = 0.0, dom_hi = 0.0;
    } affine;

    struct Exact {
        bool present = false;
        std::string pi, kappa;
    } exact;
};

struct LoadedProblem {
    ProblemFile file;
    std::optional<ControlProblem> control;
    std::optional<AffineProblem1D> affine;
    std::optional<Expr> exact_pi;
    std::optional<Expr> exact_kappa;
    std::vector<std::string> log;  // convention normalizations applied
};

ProblemFile parse_problem_text(const std::string& text);
std::string save_problem(const ProblemFile& f);  // canonical form

LoadedProblem load_problem(const std::string& path);
LoadedProblem load_problem_text(const std::string& text);

}  // namespace hjb
