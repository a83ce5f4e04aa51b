// Hamiltonian structure of the discrete-time problem: the state/costate blocks,
// the forward matrix obtained by block elimination, the symplectic pencil for
// systems with singular A, the nonlinear forward map (numeric and as a series),
// and the stable-manifold Taylor construction in decoupled coordinates.

#pragma once

#include <complex>
#include <vector>

#include "hjbseries/dpe.hpp"
#include "hjbseries/linalg.hpp"

namespace hjb {

struct SingularH22Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HamiltonianBlocks {
    Eigen::MatrixXd H11;  // A - B R^-1 S'
    Eigen::MatrixXd H12;  // -B R^-1 B'
    Eigen::MatrixXd H21;  // Q - S R^-1 S'
    Eigen::MatrixXd H22;  // A' - S R^-1 B'

    static HamiltonianBlocks from_lqr(const LqrData& d);
    int n() const { return static_cast<int>(H11.rows()); }
};

// Forward propagation matrix, derived by block elimination of the mixed
// recursion [x+; lambda] = H [x; lambda+].  Throws SingularH22Error when H22
// is not invertible (the bidirectional-only case; use the pencil path).
Eigen::MatrixXd forward_matrix(const HamiltonianBlocks& b);

// Frobenius norm of M'JM - J with J = [[0, I], [-I, 0]].
double check_symplectic(const Eigen::MatrixXd& M);

struct SymplecticPencil {
    Eigen::MatrixXd M;  // [[H11, 0], [H21, -I]]
    Eigen::MatrixXd L;  // [[I, -H12], [0, -H22]]

    static SymplecticPencil from_blocks(const HamiltonianBlocks& b);
};

struct PencilEigenvalues {
    std::vector<std::complex<double>> finite;
    int n_infinite = 0;
};

// Generalized eigenvalues of (M, L) via the determinant polynomial
// det(M - mu L): Chebyshev-node evaluation, polynomial fit, companion-matrix
// roots.  The degree deficit counts the infinite eigenvalues.
PencilEigenvalues pencil_eigenvalues(const SymplecticPencil& p);

// One step of the nonlinear forward Hamiltonian dynamics: given (x, lambda),
// solve the stationarity system for (u, lambda+) by damped Newton and advance
// x+ = f(x, u).  Also exposes the exact tangent map at a point, obtained by
// differentiating the implicit system at the converged solution.
class ForwardStepper {
  public:
    explicit ForwardStepper(const ControlProblem& p);

    struct Result {
        Eigen::VectorXd x_next;
        Eigen::VectorXd lambda_next;
        Eigen::VectorXd u;
        int newton_iters = 0;
    };
    Result step(const Eigen::VectorXd& x, const Eigen::VectorXd& lambda) const;

    // d(x+, lambda+)/d(x, lambda) at the given point; symplectic by theory.
    Eigen::MatrixXd tangent(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& lambda) const;

  private:
    int n_, m_;
    PolySeries f_;
    std::vector<PolySeries> df_;                // df/dv_a, each n outputs
    std::vector<PolySeries> dl_;                // dl/dv_a, scalar
    std::vector<std::vector<PolySeries>> d2f_;  // d2 f / dv_a dv_b
    std::vector<std::vector<PolySeries>> d2l_;
    Eigen::MatrixXd H21_, H22_;  // linear-part initial guess
    bool h22_ok_ = false;

    void residual_and_jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& lp,
                               Eigen::VectorXd* F, Eigen::MatrixXd* Jw,
                               Eigen::MatrixXd* Jv) const;
};

// Polynomial expansion of the forward map (x, lambda) -> (x+, lambda+) through
// the given degree; the linear part equals forward_matrix of the level-1 data.
PolySeries forward_map_series(const ControlProblem& p, int trunc);

struct StableManifoldSeries {
    PolySeries phi;  // lambda = phi(x), linear part P
};

// The gradient of the computed cost series, viewed as the manifold graph.
StableManifoldSeries stable_manifold_from_series(const SeriesSolution& sol);

struct InvarianceReport {
    std::vector<double> scales;
    std::vector<double> defects;  // max over sampled directions per scale
    double slope = 0.0;           // log-log fit; huge when defects are at noise
};

// Propagate points of the graph lambda = phi(x) one step and measure
// |lambda+ - phi(x+)| across scales 10^-1 .. 10^-2.5.
InvarianceReport invariance_check(const PolySeries& phi, const ControlProblem& p);

struct PhiZSeries {
    PolySeries phi_z;     // z_u = phi_z(z_s), degrees 2..r-1
    Eigen::MatrixXd T;    // (x, lambda) = T (z_s; z_u); symplectic
    Eigen::MatrixXd T_inv;
    Eigen::MatrixXd A_s;
    Eigen::MatrixXd A_u;
    double separation = 0.0;
};

// Matrix of Phi -> A_u Phi(z_s) - Phi(A_s z_s) on the coefficient space of
// degree-d homogeneous maps; invertible for hyperbolic splittings since its
// spectrum is xi - mu_{i_1}...mu_{i_d}.
Eigen::MatrixXd manifold_level_operator(const Eigen::MatrixXd& A_s,
                                        const Eigen::MatrixXd& A_u, int d);

// Taylor construction of the stable manifold in block-diagonalizing
// coordinates: per degree solve  A_u phi^[d](z) - phi^[d](A_s z) = -rhs^[d].
PhiZSeries solve_phi_taylor(const ControlProblem& p, int r);

// Re-express z_u = phi_z(z_s) as lambda = phi(x) by series inversion of the
// x-component of the parametrization.
PolySeries phi_z_to_xlambda(const PhiZSeries& pz, int trunc);

// Max Jacobian asymmetry |d phi_i / dx_j - d phi_j / dx_i| over the samples.
double closedness_check(const PolySeries& phi,
                        const std::vector<Eigen::VectorXd>& samples);

}  // namespace hjb
