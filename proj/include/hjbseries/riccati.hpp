// Level-1 solvers: discrete- and continuous-time algebraic Riccati equations,
// the backward time-varying recursion, and the stabilizability/detectability
// preconditions they rest on.

#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hjb {

enum class Mode { Discrete, Continuous };

struct LqrData {
    Eigen::MatrixXd A;  // n x n
    Eigen::MatrixXd B;  // n x m
    Eigen::MatrixXd Q;  // n x n symmetric PSD
    Eigen::MatrixXd R;  // m x m symmetric PD
    Eigen::MatrixXd S;  // n x m

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }

    // Throws std::invalid_argument when shapes are inconsistent, R is not PD,
    // or [[Q, S], [S', R]] is not PSD.
    void validate() const;
};

struct RiccatiSolution {
    Eigen::MatrixXd P;
    Eigen::MatrixXd K;
    Mode mode = Mode::Discrete;
    double residual_norm = 0.0;
};

struct ControllabilityResult {
    bool controllable = false;
    int rank = 0;
};

ControllabilityResult is_controllable(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& B);

// PBH tests.  Unstable means |mu| >= 1 (discrete) or Re mu >= 0 (continuous).
bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, Mode mode);
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Mode mode);

// P - A'PA + (A'PB+S)(B'PB+R)^-1 (A'PB+S)' - Q, and the continuous analogue.
Eigen::MatrixXd dtare_residual(const LqrData& d, const Eigen::MatrixXd& P);
Eigen::MatrixXd care_residual(const LqrData& d, const Eigen::MatrixXd& P);

// Unique stabilizing solution of the DTARE, by backward iteration of the
// time-varying recursion from P_T = 0.
RiccatiSolution solve_dtare(const LqrData& d);

// Stabilizing CARE solution by Newton-Kleinman with Kronecker Lyapunov solves;
// the initial stabilizing gain comes from the Euler-discretized DTARE.
RiccatiSolution solve_care(const LqrData& d);

// Backward recursion; element k of the result is (P_k, K_k) for k = 0..steps,
// with P_steps = P_T.  K_k is the gain applied at stage k (computed from
// P_{k+1}); the terminal entry carries a zero gain.
std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> tv_riccati(
    const LqrData& d, const Eigen::MatrixXd& P_T, int steps);

}  // namespace hjb
