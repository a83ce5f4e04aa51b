// Independent ground-truth generators: grid value iteration for discrete
// problems and closed-loop rollout cost for continuous ones.  These live on
// the oracle side of every dual-route check and must not share code with the
// series solvers.

#pragma once

#include <functional>
#include <vector>

#include "hjbseries/dpe.hpp"
#include "hjbseries/lyapunov.hpp"

namespace hjb {

struct GridValueFunction {
    Box box;
    std::vector<int> mesh;        // nodes per axis
    Eigen::VectorXd values;       // row-major over the grid
    double achieved_tol = 0.0;
    int sweeps = 0;

    // multilinear interpolation; clamps to the box
    double value_at(const Eigen::VectorXd& x) const;
};

// Fixed-point sweeps of V <- min_u [ l(x,u) + V(f(x,u)) ] with clamping
// penalty for successors leaving the box.  Control minimization: u-grid scan
// plus one golden-section refinement per axis.
GridValueFunction value_iteration(const ControlProblem& p, const Box& box,
                                  const std::vector<int>& mesh, const Box& u_box,
                                  const std::vector<int>& u_mesh, double tol,
                                  int max_sweeps);

struct RolloutResult {
    double cost = 0.0;       // quadrature plus tail estimate
    double tail = 0.0;       // quadratic tail added at the stopping point
    double final_norm = 0.0; // |x| when integration stopped
    bool tail_reached = false;
};

// RK4 integration of xdot = f(x, kappa(x)) with simultaneous cost quadrature.
// After |x| drops below 1e-6 the remaining cost is estimated by 1/2 x'Px.
// Throws on trajectory escape.
RolloutResult rollout_cost(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& l,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& kappa,
    const Eigen::VectorXd& x0, double horizon, double dt, const Eigen::MatrixXd& P_tail);

}  // namespace hjb
