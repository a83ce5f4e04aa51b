// Sublevel-set validation of an approximate cost/feedback pair.  The
// approximate cost acts as a Lyapunov function inside {pi <= c} when the
// closed-loop decay stays inside the band
//     -(1 + eps2) l  <=  dpi/dx . f  <=  -(1 - eps1) l
// (discrete problems use the one-step difference pi(f(x,kappa)) - pi(x) in
// place of the directional derivative).

#pragma once

#include <functional>
#include <vector>

#include "hjbseries/dpe.hpp"

namespace hjb {

// Point-evaluation closure over whatever representation the caller has
// (series solution, patched solution, exact expressions).
struct PointFunctions {
    Mode mode = Mode::Continuous;
    int n = 1;
    std::function<double(const Eigen::VectorXd&)> pi;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_pi;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> kappa;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> f;
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> l;
};

PointFunctions make_point_functions(const SeriesSolution& sol,
                                    const ControlProblem& p);

struct Margins {
    double stability = 0.0;   // -decay - (1 - eps1) l ; >= 0 passes
    double optimality = 0.0;  // (1 + eps2) l + decay  ; >= 0 passes
    bool pass() const { return stability >= 0.0 && optimality >= 0.0; }
};

Margins check_point(const PointFunctions& pf, double eps1, double eps2,
                    const Eigen::VectorXd& x);

struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

struct LyapunovReport {
    double c = 0.0;
    double eps1 = 0.0, eps2 = 0.0;
    int mesh = 0;
    bool valid = false;   // a passing c above c_min was found
    bool capped = false;  // the sublevel set ran into the box boundary
    double worst_margin_stability = 0.0;   // over samples with pi <= c
    double worst_margin_optimality = 0.0;
    std::vector<Eigen::VectorXd> boundary_points;  // passing, minimal stability margin
    std::vector<Eigen::VectorXd> frontier_points;  // failing, smallest pi beyond c
};

// Bisection on c over the sampled box (exhaustive grid for n <= 2, Halton
// points for n <= 4).  Throws when no passing c above c_min = 1e-8 exists.
LyapunovReport largest_sublevel(const PointFunctions& pf, double eps1, double eps2,
                                const Box& box, int mesh);

}  // namespace hjb
