// Small dense linear-algebra helpers shared across modules.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hjb {

// max |mu| over eigenvalues
double spectral_radius(const Eigen::MatrixXd& M);
// max Re(mu) over eigenvalues
double spectral_abscissa(const Eigen::MatrixXd& M);

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M);

bool is_symmetric(const Eigen::MatrixXd& M, double tol = 1e-10);
// smallest eigenvalue of the symmetric part
double min_sym_eigenvalue(const Eigen::MatrixXd& M);
bool is_psd(const Eigen::MatrixXd& M, double tol = 1e-10);
bool is_pd(const Eigen::MatrixXd& M, double tol = 1e-12);

// Any factor C with C'C = M (M symmetric PSD); eigen-decomposition based,
// tiny negative eigenvalues are clamped to zero.
Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& M);

// Rank with threshold tol = 1e-9 * ||M|| (column-pivoted QR).
int matrix_rank(const Eigen::MatrixXd& M);
int matrix_rank(const Eigen::MatrixXcd& M);

// Solve A X + X B = C (Sylvester) through the Kronecker-product system.
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C);

// Ordered real Schur split of M into invariant blocks.
//   inv(T) * M * T = blkdiag(A_sel, A_rest)
// where A_sel carries the eigenvalues accepted by `select` and A_rest the
// others.  `separation` reports the conditioning of the block decoupling.
struct SpectralSplit {
    Eigen::MatrixXd T;
    Eigen::MatrixXd T_inv;
    Eigen::MatrixXd A_sel;
    Eigen::MatrixXd A_rest;
    double separation = 0.0;
};
SpectralSplit ordered_schur_split(const Eigen::MatrixXd& M,
                                  const std::function<bool(std::complex<double>)>& select);

}  // namespace hjb
