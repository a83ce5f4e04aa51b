// Continuous-time power-series solution of the HJB PDE, level by level.
// Shares the residual-extraction engine of the discrete solver; the level
// operator here is q(x) -> grad q(x) . (A+BK)x.

#pragma once

#include <vector>

#include "hjbseries/dpe.hpp"

namespace hjb {

// Degree-(d+1) right-hand side at level d: the degree-(d+1) part of
//   grad pi_known(x) . f(x, kappa_known(x)) + l(x, kappa_known(x)).
HomogeneousPoly hjb_level_rhs(const ControlProblem& p, const PolySeries& pi_known,
                              const PolySeries& kappa_known, int d);

// Matrix of q(x) -> grad q(x) . (Mx) on the monomial basis of the given
// degree; eigenvalues are sums of `degree` eigenvalues of M, hence the
// operator is invertible when M is Hurwitz.
Eigen::MatrixXd hjb_level_operator(const Eigen::MatrixXd& M, int degree);

SeriesSolution solve_hjb_series(const ControlProblem& p, int r);

// Per-degree coefficient norms of both HJB defects of a computed solution
// (same report shape as the discrete case).
DpeResidualReport hjb_series_residual(const SeriesSolution& sol,
                                      const ControlProblem& p, int r);

// Pointwise defect of both HJB equations at the sample points, using the
// problem's series dynamics and cost.
struct HjbResidualReport {
    double max_eq1 = 0.0;  // |grad pi . f + l|
    double max_eq2 = 0.0;  // u-gradient condition, infinity norm over outputs
};
HjbResidualReport hjb_residual(const SeriesSolution& sol, const ControlProblem& p,
                               const std::vector<Eigen::VectorXd>& points);

}  // namespace hjb
