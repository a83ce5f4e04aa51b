#include "hjbseries/riccati.hpp"

#include <stdexcept>

#include "hjbseries/linalg.hpp"

namespace hjb {

void LqrData::validate() const {
    const int nn = n(), mm = m();
    if (A.rows() != nn || A.cols() != nn) throw std::invalid_argument("LqrData: A not square");
    if (B.rows() != nn) throw std::invalid_argument("LqrData: B row count");
    if (Q.rows() != nn || Q.cols() != nn) throw std::invalid_argument("LqrData: Q shape");
    if (R.rows() != mm || R.cols() != mm) throw std::invalid_argument("LqrData: R shape");
    if (S.rows() != nn || S.cols() != mm) throw std::invalid_argument("LqrData: S shape");
    if (!is_symmetric(Q)) throw std::invalid_argument("LqrData: Q not symmetric");
    if (!is_symmetric(R)) throw std::invalid_argument("LqrData: R not symmetric");
    if (!is_pd(R)) throw std::invalid_argument("LqrData: R not positive definite");
    Eigen::MatrixXd W(nn + mm, nn + mm);
    W << Q, S, S.transpose(), R;
    if (!is_psd(W))
        throw std::invalid_argument("LqrData: [[Q,S],[S',R]] not positive semidefinite");
}

ControllabilityResult is_controllable(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& B) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || B.rows() != n)
        throw std::invalid_argument("is_controllable: dimension mismatch");
    const int m = static_cast<int>(B.cols());
    Eigen::MatrixXd C(n, n * m);
    Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k < n; ++k) {
        C.block(0, k * m, n, m) = Ak * B;
        Ak = A * Ak;
    }
    const int r = matrix_rank(C);
    return {r == n, r};
}

namespace {

bool pbh_all_unstable_modes_pass(const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& W, Mode mode,
                                 bool stack_below) {
    const int n = static_cast<int>(A.rows());
    for (const auto& mu : eigenvalues(A)) {
        const bool unstable = (mode == Mode::Discrete) ? std::abs(mu) >= 1.0
                                                       : mu.real() >= 0.0;
        if (!unstable) continue;
        Eigen::MatrixXcd muI_A = mu * Eigen::MatrixXcd::Identity(n, n) - A;
        Eigen::MatrixXcd M;
        if (stack_below) {  // [muI - A; C]
            M.resize(n + W.rows(), n);
            M.topRows(n) = muI_A;
            M.bottomRows(W.rows()) = W.cast<std::complex<double>>();
        } else {  // [muI - A, B]
            M.resize(n, n + W.cols());
            M.leftCols(n) = muI_A;
            M.rightCols(W.cols()) = W.cast<std::complex<double>>();
        }
        if (matrix_rank(M) < n) return false;
    }
    return true;
}

}  // namespace

bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, Mode mode) {
    if (C.cols() != A.rows())
        throw std::invalid_argument("is_detectable: C column count");
    return pbh_all_unstable_modes_pass(A, C, mode, /*stack_below=*/true);
}

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Mode mode) {
    if (B.rows() != A.rows())
        throw std::invalid_argument("is_stabilizable: B row count");
    return pbh_all_unstable_modes_pass(A, B, mode, /*stack_below=*/false);
}

Eigen::MatrixXd dtare_residual(const LqrData& d, const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd G = d.A.transpose() * P * d.B + d.S;
    const Eigen::MatrixXd H = d.B.transpose() * P * d.B + d.R;
    return P - d.A.transpose() * P * d.A + G * H.ldlt().solve(G.transpose()) - d.Q;
}

Eigen::MatrixXd care_residual(const LqrData& d, const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd G = P * d.B + d.S;
    return d.A.transpose() * P + P * d.A + d.Q -
           G * d.R.ldlt().solve(G.transpose());
}

namespace {

void check_preconditions(const LqrData& d, Mode mode) {
    d.validate();
    if (!is_stabilizable(d.A, d.B, mode))
        throw std::invalid_argument("riccati: (A,B) not stabilizable");
    const Eigen::MatrixXd C = psd_sqrt_factor(d.Q);
    if (!is_detectable(d.A, C, mode))
        throw std::invalid_argument("riccati: (A,Q^{1/2}) not detectable");
}

Eigen::MatrixXd dtare_gain(const LqrData& d, const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd H = d.B.transpose() * P * d.B + d.R;
    const Eigen::MatrixXd G = d.A.transpose() * P * d.B + d.S;
    return -H.ldlt().solve(G.transpose());
}

}  // namespace

std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> tv_riccati(
    const LqrData& d, const Eigen::MatrixXd& P_T, int steps) {
    d.validate();
    if (!is_symmetric(P_T) || !is_psd(P_T))
        throw std::invalid_argument("tv_riccati: P_T must be symmetric PSD");
    if (steps < 0) throw std::invalid_argument("tv_riccati: steps < 0");
    std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> out(steps + 1);
    out[steps] = {P_T, Eigen::MatrixXd::Zero(d.m(), d.n())};
    for (int k = steps - 1; k >= 0; --k) {
        const Eigen::MatrixXd& Pn = out[k + 1].first;
        const Eigen::MatrixXd H = d.B.transpose() * Pn * d.B + d.R;
        if (!is_pd(H, 0.0))
            throw std::runtime_error("tv_riccati: B'PB+R lost definiteness");
        const Eigen::MatrixXd K = dtare_gain(d, Pn);
        Eigen::MatrixXd P =
            d.A.transpose() * Pn * d.A + (d.A.transpose() * Pn * d.B + d.S) * K + d.Q;
        P = 0.5 * (P + P.transpose());
        out[k] = {P, K};
    }
    return out;
}

RiccatiSolution solve_dtare(const LqrData& d) {
    check_preconditions(d, Mode::Discrete);
    const int max_iter = 200000;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d.n(), d.n());
    double dp = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::MatrixXd K = dtare_gain(d, P);
        Eigen::MatrixXd Pn =
            d.A.transpose() * P * d.A + (d.A.transpose() * P * d.B + d.S) * K + d.Q;
        Pn = 0.5 * (Pn + Pn.transpose());
        dp = (Pn - P).lpNorm<Eigen::Infinity>();
        P = Pn;
        if (dp <= 1e-15 * (1.0 + P.lpNorm<Eigen::Infinity>())) break;
    }
    if (!(dp <= 1e-12 * (1.0 + P.lpNorm<Eigen::Infinity>())))
        throw std::runtime_error("solve_dtare: backward iteration did not converge");

    RiccatiSolution sol;
    sol.P = P;
    sol.K = dtare_gain(d, P);
    sol.mode = Mode::Discrete;
    sol.residual_norm = dtare_residual(d, P).lpNorm<Eigen::Infinity>();
    if (sol.residual_norm > 1e-10 * (1.0 + P.lpNorm<Eigen::Infinity>()))
        throw std::runtime_error("solve_dtare: residual above tolerance");
    if (spectral_radius(d.A + d.B * sol.K) >= 1.0)
        throw std::runtime_error("solve_dtare: closed loop not stable");
    return sol;
}

RiccatiSolution solve_care(const LqrData& d) {
    check_preconditions(d, Mode::Continuous);
    const int n = d.n();

    // initial stabilizing gain from the Euler-discretized problem
    const double h = 1e-2;
    LqrData dd;
    dd.A = Eigen::MatrixXd::Identity(n, n) + h * d.A;
    dd.B = h * d.B;
    dd.Q = h * d.Q;
    dd.R = h * d.R;
    dd.S = h * d.S;
    Eigen::MatrixXd K = solve_dtare(dd).K;
    if (spectral_abscissa(d.A + d.B * K) >= 0.0)
        throw std::runtime_error("solve_care: discretized initial gain not stabilizing");

    // Newton-Kleinman: closed-loop Lyapunov solve per iterate
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int it = 0; it < 100; ++it) {
        const Eigen::MatrixXd Acl = d.A + d.B * K;
        const Eigen::MatrixXd W = d.Q + d.S * K + K.transpose() * d.S.transpose() +
                                  K.transpose() * d.R * K;
        // Acl' P + P Acl = -W
        Eigen::MatrixXd Pn = solve_sylvester(Acl.transpose(), Acl, -W);
        Pn = 0.5 * (Pn + Pn.transpose());
        const Eigen::MatrixXd Kn = -d.R.ldlt().solve((Pn * d.B + d.S).transpose());
        const double dp = (Pn - P).lpNorm<Eigen::Infinity>();
        P = Pn;
        K = Kn;
        if (dp <= 1e-14 * (1.0 + P.lpNorm<Eigen::Infinity>())) break;
    }

    RiccatiSolution sol;
    sol.P = P;
    sol.K = K;
    sol.mode = Mode::Continuous;
    sol.residual_norm = care_residual(d, P).lpNorm<Eigen::Infinity>();
    if (sol.residual_norm > 1e-10 * (1.0 + P.lpNorm<Eigen::Infinity>()))
        throw std::runtime_error("solve_care: residual above tolerance");
    if (spectral_abscissa(d.A + d.B * K) >= 0.0)
        throw std::runtime_error("solve_care: closed loop not stable");
    return sol;
}

}  // namespace hjb
