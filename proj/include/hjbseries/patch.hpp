// 1-D Taylor patching of the HJB solution across a domain.  A patch carries
// the jets of pi and kappa at a center, produced by differentiating the two
// HJB equations: the k-th derivative of the cost equation pins pi^(k+1)
// (multiplied by f(xbar, kappa(xbar))), the k-th derivative of the gradient
// equation pins kappa^(k) (multiplied by 2 l2(xbar)).  Patches are glued by
// the pointwise minimum, the lower branch being the better cost estimate.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjbseries/dpe.hpp"
#include "hjbseries/expr.hpp"
#include "hjbseries/lyapunov.hpp"

namespace hjb {

struct CharacteristicPointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scalar control-affine problem: xdot = g0(x) + g1(x) u,
// l(x,u) = l0(x) + l1(x) u + l2(x) u^2, on the interval (lo, hi] around 0.
struct AffineProblem1D {
    Expr g0, g1, l0, l1, l2;
    double dom_lo = 0.0;
    double dom_hi = 0.0;

    double f(double x, double u) const { return g0.eval(x) + g1.eval(x) * u; }
    double l(double x, double u) const {
        return l0.eval(x) + l1.eval(x) * u + l2.eval(x) * u * u;
    }

    // admissibility: l2 > 0 on the mesh, g0(0)=0, l0(0)=0, l0'(0)=0
    void validate(int mesh = 256) const;

    // series form around 0 for the Albrecht start (f to degree r-1, l to r)
    ControlProblem to_control_problem(int r) const;
};

struct Patch {
    double center = 0.0;
    jets::Jet pi_jet;     // orders 0..d+1
    jets::Jet kappa_jet;  // orders 0..d
    double lo = 0.0, hi = 0.0;  // validity interval

    double pi(double x) const { return jets::eval(pi_jet, x - center); }
    double pi_prime(double x) const {
        return jets::eval(jets::derivative(pi_jet), x - center);
    }
    double kappa(double x) const { return jets::eval(kappa_jet, x - center); }
    bool covers(double x) const { return x >= lo && x <= hi; }
};

// Jets at xbar from the Cauchy data (pi0, pi1, kappa0).  Requires
// |f(xbar, kappa0)| > 1e-10 (else CharacteristicPointError) and kappa0
// consistent with the gradient equation to 1e-8.
Patch taylor_at_point(const AffineProblem1D& p, double xbar, double pi0,
                      double pi1, double kappa0, int d);

struct PatchedSolution {
    std::vector<Patch> patches;

    double pi(double x) const;
    double pi_prime(double x) const;
    double kappa(double x) const;
    const Patch& winner(double x) const;  // branch selected by the min rule
    int winner_index(double x) const;
};

// Append `next` to `cur`; its interval must overlap the current frontier.
PatchedSolution glue(const PatchedSolution& cur, const Patch& next);

struct MarchRecord {
    double center = 0.0;
    bool kappa_rederived = false;  // gradient equation overrode the stored kappa
    bool pi1_rederived = false;    // cost equation overrode the stored pi'
    double hjb3_gap = 0.0;         // order-0 defect of the incoming Cauchy data
    double seam_gap_pi = 0.0;      // |pi_old - pi_new| at the seam
    double seam_gap_kappa = 0.0;
};

struct MarchResult {
    PatchedSolution solution;
    std::vector<MarchRecord> records;   // one per new patch
    std::vector<double> boundaries;     // Lyapunov boundary points, in order
    std::string stop_reason;            // edge | max_patches | characteristic |
                                        // no_real_cauchy_data
};

struct MarchOptions {
    int degree = 3;       // kappa jet order; pi jets go one higher
    double eps1 = 0.015625;
    double eps2 = 0.015625;
    int mesh = 256;       // samples along the marching ray
    int direction = +1;   // +1 toward dom_hi, -1 toward dom_lo
    int max_patches = 6;  // new patches beyond the origin series
};

// Repeatedly: find the Lyapunov boundary of the incumbent solution along the
// ray, take Cauchy data there (re-derived from the PDE when inconsistent),
// build a Taylor patch, glue by the min rule.
MarchResult march(const AffineProblem1D& p, const MarchOptions& opt);

// Point functions of a patched solution against the exact problem data.
PointFunctions make_point_functions(const PatchedSolution& sol,
                                    const AffineProblem1D& p);

}  // namespace hjb
