// Term-by-term solution of the discrete-time Dynamic Programming Equations.
//
// The level-d step extracts the degree-(d+1) defect of the first DPE with the
// feedback known so far substituted in, and inverts the linear operator
// q(x) -> q(x) - q((A+BK)x) on the homogeneous monomial basis.  The feedback
// correction then comes from the u-gradient condition.

#pragma once

#include <vector>

#include "hjbseries/polyalg.hpp"
#include "hjbseries/riccati.hpp"

namespace hjb {

// Polynomial optimal control problem.  Dynamics f and cost l are series over
// the stacked variables (x_1..x_n, u_1..u_m); f has n outputs with degrees
// >= 1, l is scalar with degrees >= 2.
struct ControlProblem {
    Mode mode = Mode::Discrete;
    int n = 0;
    int m = 0;
    PolySeries f;
    PolySeries l;

    // Level-1 data read off the lowest-degree terms.
    LqrData extract_lqr() const;

    // Structural invariants: shapes, no constant/linear cost terms, no
    // constant dynamics terms, R PD and [[Q,S],[S',R]] PSD.
    void validate() const;
};

struct SeriesSolution {
    Eigen::MatrixXd P;
    Eigen::MatrixXd K;
    PolySeries pi;     // scalar over x, degrees 2..trunc
    PolySeries kappa;  // m outputs over x, degrees 1..trunc-1
    int trunc = 0;
    Mode mode = Mode::Discrete;

    double pi_at(const Eigen::VectorXd& x) const { return pi.eval_scalar(x); }
    Eigen::VectorXd kappa_at(const Eigen::VectorXd& x) const { return kappa.eval(x); }
};

// (x) -> (x, kappa(x)): n+m outputs over the n state variables.
PolySeries closed_loop_subst(const PolySeries& kappa, int n, int m, int trunc);
// (x, u) -> (x, kappa(x) + u): the feedback shift used to build f-bar, l-bar.
PolySeries feedback_shift_subst(const PolySeries& kappa, int n, int m, int trunc);

// Degree-(d+1) right-hand side at level d: the degree-(d+1) part of
//   pi_known(x) - pi_known(f(x, kappa_known(x))) - l(x, kappa_known(x)).
// Independent of any degree-d feedback part present in kappa_known.
HomogeneousPoly dpe_level_rhs(const ControlProblem& p, const PolySeries& pi_known,
                              const PolySeries& kappa_known, int d);

// Matrix of q(x) -> q(x) - q(Mx) on the monomial basis of the given degree.
// Invertible whenever the spectral radius of M is below one: its eigenvalues
// are 1 - mu_{i_1}...mu_{i_degree}.
Eigen::MatrixXd dpe_level_operator(const Eigen::MatrixXd& M, int degree);

SeriesSolution solve_dpe_series(const ControlProblem& p, int r);

// Per-degree coefficient norms of both DPE defects for a computed solution:
// first the cost equation (degrees 0..r), then the gradient equation
// (degrees 0..r-1).
struct DpeResidualReport {
    std::vector<double> eq1;  // index = degree
    std::vector<double> eq2;
};
DpeResidualReport dpe_residual(const SeriesSolution& sol, const ControlProblem& p,
                               int r);

}  // namespace hjb
