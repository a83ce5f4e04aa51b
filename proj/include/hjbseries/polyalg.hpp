// Graded multivariate polynomial arithmetic.
//
// Polynomials are stored as collections of homogeneous parts.  Coefficients
// of a homogeneous part of degree d in n variables live in a dense vector
// indexed by the graded-lexicographic rank of the monomial.  Everything here
// is a value type and all operations are pure functions.

#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hjb {

using MultiIndex = std::vector<int>;

inline int multi_degree(const MultiIndex& a) {
    int d = 0;
    for (int e : a) d += e;
    return d;
}

// Number of monomials of degree d in n variables: C(n+d-1, d).
long long monomial_count(int n_vars, int degree);

// All monomials of exact degree d in graded-lex order (descending
// lexicographic on the exponent vector).  Deterministic.
std::vector<MultiIndex> enumerate_monomials(int n_vars, int degree);

// Position of `a` within enumerate_monomials(n_vars, degree(a)).
int monomial_rank(const MultiIndex& a);

struct HomogeneousPoly {
    int n_vars = 0;
    int degree = 0;
    Eigen::VectorXd coeffs;  // dense, graded-lex rank order

    HomogeneousPoly() = default;
    HomogeneousPoly(int n, int d)
        : n_vars(n), degree(d),
          coeffs(Eigen::VectorXd::Zero(monomial_count(n, d))) {}

    double coeff(const MultiIndex& a) const { return coeffs[monomial_rank(a)]; }
    double& coeff(const MultiIndex& a) { return coeffs[monomial_rank(a)]; }

    double eval(const Eigen::VectorXd& x) const;
    bool is_zero(double tol = 0.0) const {
        return coeffs.size() == 0 || coeffs.lpNorm<Eigen::Infinity>() <= tol;
    }
};

HomogeneousPoly hom_add(const HomogeneousPoly& a, const HomogeneousPoly& b);
HomogeneousPoly hom_scale(const HomogeneousPoly& a, double s);
HomogeneousPoly hom_mul(const HomogeneousPoly& a, const HomogeneousPoly& b);

// Vector-valued truncated power series: per output component a map
// degree -> homogeneous part.  Missing degrees are zero.
struct PolySeries {
    int n_vars = 0;
    int trunc = 0;  // terms of degree > trunc are discarded by all operations
    std::vector<std::map<int, HomogeneousPoly>> comps;

    PolySeries() = default;
    PolySeries(int n, int n_out, int r) : n_vars(n), trunc(r), comps(n_out) {}

    int n_out() const { return static_cast<int>(comps.size()); }

    void add_part(int comp, const HomogeneousPoly& h);
    // Exactly the degree-d part (zero polynomial if absent).
    HomogeneousPoly hom_part(int comp, int d) const;

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
    double eval_scalar(const Eigen::VectorXd& x) const;

    // Infinity norm over all stored coefficients.
    double coeff_norm() const;
    double coeff_norm(int d) const;  // over the degree-d parts only

    int min_degree() const;  // smallest stored nonempty degree (trunc+1 if none)
};

PolySeries series_add(const PolySeries& a, const PolySeries& b);
PolySeries series_scale(const PolySeries& a, double s);
PolySeries series_mul(const PolySeries& a, const PolySeries& b, int trunc);
PolySeries series_truncate(const PolySeries& a, int trunc);

// Keep a single output as a scalar series.
PolySeries series_component(const PolySeries& a, int comp);
// Stack outputs of a and b (same variables).
PolySeries series_stack(const PolySeries& a, const PolySeries& b);

// d/dx_var applied to every component.
PolySeries series_partial(const PolySeries& a, int var);
// Gradient of a scalar series: n_vars outputs.
PolySeries grad(const PolySeries& s);

// x -> x (n outputs over n vars).
PolySeries identity_series(int n_vars, int trunc);
// x -> M x.
PolySeries linear_series(const Eigen::MatrixXd& M, int trunc);
// x -> 1/2 x'Px (scalar).
PolySeries quadratic_form_series(const Eigen::MatrixXd& P, int trunc);
// Constant-zero series with given shape.
PolySeries zero_series(int n_vars, int n_out, int trunc);

// outer(inner(x)) truncated to `trunc`.  inner must have no degree-0 terms
// and its output count must match outer.n_vars.
PolySeries compose(const PolySeries& outer, const PolySeries& inner, int trunc);

// Re-index the variables of `a` into a space of `new_n_vars` variables,
// variable i of `a` becoming variable var_map[i].
PolySeries embed_vars(const PolySeries& a, int new_n_vars,
                      const std::vector<int>& var_map);

// Set all variables not in `keep` to zero and re-express over the kept
// variables, in the order given.
PolySeries project_vars(const PolySeries& a, const std::vector<int>& keep);

// Solve F(v, w(v)) = 0 for w as a series in v, degree by degree.
// F: series over (v, w) with n_w outputs, F(0,0) = 0, dF/dw at 0 invertible.
PolySeries implicit_series(const PolySeries& F, int n_v, int n_w, int trunc);

// Series inverse of x = X(z): returns z(x) with X(z(x)) = x + O(trunc+1).
// X must have invertible linear part.
PolySeries invert_series(const PolySeries& X, int trunc);

}  // namespace hjb
