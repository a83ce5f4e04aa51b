#include "hjbseries/linalg.hpp"

#include <functional>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace hjb {

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("eigenvalues: square matrix expected");
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalues: QR iteration did not converge");
    std::vector<std::complex<double>> out(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i) out[i] = es.eigenvalues()[i];
    return out;
}

double spectral_radius(const Eigen::MatrixXd& M) {
    double r = 0.0;
    for (const auto& mu : eigenvalues(M)) r = std::max(r, std::abs(mu));
    return r;
}

double spectral_abscissa(const Eigen::MatrixXd& M) {
    double a = -std::numeric_limits<double>::infinity();
    for (const auto& mu : eigenvalues(M)) a = std::max(a, mu.real());
    return a;
}

bool is_symmetric(const Eigen::MatrixXd& M, double tol) {
    return (M - M.transpose()).lpNorm<Eigen::Infinity>() <=
           tol * (1.0 + M.lpNorm<Eigen::Infinity>());
}

double min_sym_eigenvalue(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    return es.eigenvalues().minCoeff();
}

bool is_psd(const Eigen::MatrixXd& M, double tol) {
    return min_sym_eigenvalue(M) >= -tol * (1.0 + M.lpNorm<Eigen::Infinity>());
}

bool is_pd(const Eigen::MatrixXd& M, double tol) {
    return min_sym_eigenvalue(M) > tol;
}

Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::sqrt(std::max(lam[i], 0.0));
    return lam.asDiagonal() * es.eigenvectors().transpose();
}

int matrix_rank(const Eigen::MatrixXd& M) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-9);
    return static_cast<int>(qr.rank());
}

int matrix_rank(const Eigen::MatrixXcd& M) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M);
    qr.setThreshold(1e-9);
    return static_cast<int>(qr.rank());
}

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    if (C.rows() != n || C.cols() != m)
        throw std::invalid_argument("solve_sylvester: shape mismatch");
    // vec(AX + XB) = (I (x) A + B' (x) I) vec(X)
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * m, n * m);
    for (Eigen::Index j = 0; j < m; ++j)
        K.block(j * n, j * n, n, n) = A;
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i)
            K.block(j * n, i * n, n, n) += B(i, j) * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd c(n * m);
    for (Eigen::Index j = 0; j < m; ++j) c.segment(j * n, n) = C.col(j);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd x = lu.solve(c);
    if (!c.isApprox(K * x, 1e-8))
        throw std::runtime_error("solve_sylvester: singular operator");
    Eigen::MatrixXd X(n, m);
    for (Eigen::Index j = 0; j < m; ++j) X.col(j) = x.segment(j * n, n);
    return X;
}

namespace {

// Block layout of a real quasi-triangular matrix: start index and size (1|2).
struct SchurBlock {
    int start;
    int size;
    std::complex<double> eig;  // representative eigenvalue
};

std::vector<SchurBlock> schur_blocks(const Eigen::MatrixXd& T) {
    std::vector<SchurBlock> blocks;
    const int n = static_cast<int>(T.rows());
    const double tol = 1e-12 * (1.0 + T.lpNorm<Eigen::Infinity>());
    int i = 0;
    while (i < n) {
        if (i + 1 < n && std::abs(T(i + 1, i)) > tol) {
            const double tr = T(i, i) + T(i + 1, i + 1);
            const double det = T(i, i) * T(i + 1, i + 1) - T(i, i + 1) * T(i + 1, i);
            const double disc = tr * tr / 4.0 - det;
            std::complex<double> eig;
            if (disc < 0)
                eig = std::complex<double>(tr / 2.0, std::sqrt(-disc));
            else
                eig = std::complex<double>(tr / 2.0 + std::sqrt(disc), 0.0);
            blocks.push_back({i, 2, eig});
            i += 2;
        } else {
            blocks.push_back({i, 1, {T(i, i), 0.0}});
            i += 1;
        }
    }
    return blocks;
}

// Swap two adjacent diagonal blocks of the quasi-triangular T, updating the
// accumulated orthogonal Q.  Direct method: the invariant subspace of the
// trailing block is spanned by [X; I] with T11 X - X T22 = -T12.
void swap_adjacent_blocks(Eigen::MatrixXd& T, Eigen::MatrixXd& Q, int i, int p, int q) {
    const int n = static_cast<int>(T.rows());
    Eigen::MatrixXd T11 = T.block(i, i, p, p);
    Eigen::MatrixXd T12 = T.block(i, i + p, p, q);
    Eigen::MatrixXd T22 = T.block(i + p, i + p, q, q);
    Eigen::MatrixXd X = solve_sylvester(T11, -T22, -T12);
    Eigen::MatrixXd Z(p + q, q);
    Z.topRows(p) = X;
    Z.bottomRows(q) = Eigen::MatrixXd::Identity(q, q);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    Eigen::MatrixXd Qs = qr.householderQ();
    // apply the local rotation to the full factorization
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(n, n);
    G.block(i, i, p + q, p + q) = Qs;
    T = G.transpose() * T * G;
    Q = Q * G;
    // clean the subdiagonal fill-in of the swapped window
    for (int r = i; r < i + p + q; ++r)
        for (int c = i; c < r - 1; ++c) T(r, c) = 0.0;
}

}  // namespace

SpectralSplit ordered_schur_split(
    const Eigen::MatrixXd& M,
    const std::function<bool(std::complex<double>)>& select) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("ordered_schur_split: square matrix expected");
    Eigen::RealSchur<Eigen::MatrixXd> schur(M);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("ordered_schur_split: Schur iteration failed");
    Eigen::MatrixXd T = schur.matrixT();
    Eigen::MatrixXd Q = schur.matrixU();

    // bubble selected blocks to the top
    while (true) {
        auto blocks = schur_blocks(T);
        int swap_at = -1;
        for (size_t b = 0; b + 1 < blocks.size(); ++b) {
            if (!select(blocks[b].eig) && select(blocks[b + 1].eig)) {
                swap_at = static_cast<int>(b);
                break;
            }
        }
        if (swap_at < 0) break;
        auto& b0 = blocks[swap_at];
        auto& b1 = blocks[swap_at + 1];
        swap_adjacent_blocks(T, Q, b0.start, b0.size, b1.size);
    }

    int n_sel = 0;
    for (const auto& b : schur_blocks(T))
        if (select(b.eig)) n_sel += b.size;

    const int n = static_cast<int>(M.rows());
    Eigen::MatrixXd S11 = T.block(0, 0, n_sel, n_sel);
    Eigen::MatrixXd S12 = T.block(0, n_sel, n_sel, n - n_sel);
    Eigen::MatrixXd S22 = T.block(n_sel, n_sel, n - n_sel, n - n_sel);

    // decouple: S11 Y - Y S22 = -S12, then T_full = Q * [[I, Y], [0, I]]
    Eigen::MatrixXd Y = solve_sylvester(S11, -S22, -S12);
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n);
    W.block(0, n_sel, n_sel, n - n_sel) = Y;

    SpectralSplit out;
    out.T = Q * W;
    Eigen::MatrixXd W_inv = Eigen::MatrixXd::Identity(n, n);
    W_inv.block(0, n_sel, n_sel, n - n_sel) = -Y;
    out.T_inv = W_inv * Q.transpose();
    out.A_sel = S11;
    out.A_rest = S22;
    out.separation = 1.0 / (1.0 + Y.lpNorm<Eigen::Infinity>());
    return out;
}

}  // namespace hjb
