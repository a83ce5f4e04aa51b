#include "hjbseries/hamiltonian.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace hjb {

HamiltonianBlocks HamiltonianBlocks::from_lqr(const LqrData& d) {
    const Eigen::LDLT<Eigen::MatrixXd> Rld(d.R);
    HamiltonianBlocks b;
    b.H11 = d.A - d.B * Rld.solve(d.S.transpose());
    b.H12 = -d.B * Rld.solve(d.B.transpose());
    b.H21 = d.Q - d.S * Rld.solve(d.S.transpose());
    b.H22 = d.A.transpose() - d.S * Rld.solve(d.B.transpose());
    return b;
}

Eigen::MatrixXd forward_matrix(const HamiltonianBlocks& b) {
    const int n = b.n();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b.H22);
    if (!lu.isInvertible())
        throw SingularH22Error("bidirectional-only system; use pencil path");
    const Eigen::MatrixXd H22inv_H21 = lu.solve(b.H21);
    Eigen::MatrixXd F(2 * n, 2 * n);
    F.topLeftCorner(n, n) = b.H11 - b.H12 * H22inv_H21;
    F.topRightCorner(n, n) = b.H12 * lu.inverse();
    F.bottomLeftCorner(n, n) = -H22inv_H21;
    F.bottomRightCorner(n, n) = lu.inverse();
    return F;
}

double check_symplectic(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols() || M.rows() % 2 != 0)
        throw std::invalid_argument("check_symplectic: even square matrix expected");
    const int n = static_cast<int>(M.rows()) / 2;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    J.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return (M.transpose() * J * M - J).norm();
}

SymplecticPencil SymplecticPencil::from_blocks(const HamiltonianBlocks& b) {
    const int n = b.n();
    SymplecticPencil p;
    p.M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    p.M.topLeftCorner(n, n) = b.H11;
    p.M.bottomLeftCorner(n, n) = b.H21;
    p.M.bottomRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    p.L = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    p.L.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    p.L.topRightCorner(n, n) = -b.H12;
    p.L.bottomRightCorner(n, n) = -b.H22;
    return p;
}

PencilEigenvalues pencil_eigenvalues(const SymplecticPencil& p) {
    const int N = static_cast<int>(p.M.rows());
    const double scale = 1.0 + p.M.norm() + p.L.norm();
    const int K = N + 7;  // least-squares fit over Chebyshev nodes

    Eigen::VectorXd nodes(K), vals(K);
    for (int k = 0; k < K; ++k) {
        const double t = std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * K));
        nodes[k] = scale * t;
        vals[k] = (p.M - nodes[k] * p.L).fullPivLu().determinant();
    }
    const double vmax = vals.cwiseAbs().maxCoeff();
    if (vmax == 0.0)
        throw std::runtime_error("pencil_eigenvalues: identically singular pencil");
    vals /= vmax;

    // fit c_0 + c_1 (mu/scale) + ... + c_N (mu/scale)^N
    Eigen::MatrixXd V(K, N + 1);
    for (int k = 0; k < K; ++k) {
        double t = 1.0;
        for (int j = 0; j <= N; ++j) {
            V(k, j) = t;
            t *= nodes[k] / scale;
        }
    }
    Eigen::VectorXd c = V.colPivHouseholderQr().solve(vals);

    int deg = N;
    const double ctol = 1e-10 * c.cwiseAbs().maxCoeff();
    while (deg > 0 && std::abs(c[deg]) <= ctol) --deg;

    PencilEigenvalues out;
    out.n_infinite = N - deg;
    if (deg == 0) return out;

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int i = 0; i < deg; ++i)
        out.finite.push_back(es.eigenvalues()[i] * scale);
    return out;
}

ForwardStepper::ForwardStepper(const ControlProblem& p)
    : n_(p.n), m_(p.m), f_(p.f) {
    if (p.mode != Mode::Discrete)
        throw std::invalid_argument("ForwardStepper: discrete problem expected");
    const int nv = n_ + m_;
    for (int a = 0; a < nv; ++a) {
        df_.push_back(series_partial(p.f, a));
        dl_.push_back(series_partial(p.l, a));
    }
    d2f_.resize(nv);
    d2l_.resize(nv);
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) {
            d2f_[a].push_back(series_partial(df_[a], b));
            d2l_[a].push_back(series_partial(dl_[a], b));
        }
    const LqrData lqr = p.extract_lqr();
    const HamiltonianBlocks blocks = HamiltonianBlocks::from_lqr(lqr);
    H21_ = blocks.H21;
    H22_ = blocks.H22;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H22_);
    h22_ok_ = lu.isInvertible();
}

void ForwardStepper::residual_and_jacobian(
    const Eigen::VectorXd& x, const Eigen::VectorXd& lambda,
    const Eigen::VectorXd& u, const Eigen::VectorXd& lp, Eigen::VectorXd* F,
    Eigen::MatrixXd* Jw, Eigen::MatrixXd* Jv) const {
    const int n = n_, m = m_;
    Eigen::VectorXd xu(n + m);
    xu << x, u;

    // first derivatives at (x,u)
    Eigen::MatrixXd fx(n, n), fu(n, m);
    Eigen::VectorXd lx(n), lu_(m);
    for (int a = 0; a < n; ++a) {
        fx.col(a) = df_[a].eval(xu);
        lx[a] = dl_[a].eval_scalar(xu);
    }
    for (int b = 0; b < m; ++b) {
        fu.col(b) = df_[n + b].eval(xu);
        lu_[b] = dl_[n + b].eval_scalar(xu);
    }

    if (F) {
        F->resize(n + m);
        F->head(n) = lx + fx.transpose() * lp - lambda;
        F->tail(m) = lu_ + fu.transpose() * lp;
    }

    auto hess_entry = [&](int a, int b) {
        // d^2 H / dv_a dv_b with H = l + lp' f, at fixed lp
        double v = d2l_[a][b].eval_scalar(xu);
        v += lp.dot(d2f_[a][b].eval(xu));
        return v;
    };

    if (Jw) {
        Jw->resize(n + m, n + m);
        // d F1 / du, d F1 / dlp
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) (*Jw)(i, j) = hess_entry(i, n + j);
            for (int k = 0; k < n; ++k) (*Jw)(i, m + k) = fx(k, i);
        }
        for (int j = 0; j < m; ++j) {
            for (int j2 = 0; j2 < m; ++j2) (*Jw)(n + j, j2) = hess_entry(n + j, n + j2);
            for (int k = 0; k < n; ++k) (*Jw)(n + j, m + k) = fu(k, j);
        }
    }
    if (Jv) {
        Jv->resize(n + m, 2 * n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) (*Jv)(i, j) = hess_entry(i, j);
            for (int j = 0; j < n; ++j) (*Jv)(i, n + j) = (i == j) ? -1.0 : 0.0;
        }
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < n; ++i) (*Jv)(n + j, i) = hess_entry(n + j, i);
            for (int i = 0; i < n; ++i) (*Jv)(n + j, n + i) = 0.0;
        }
    }
}

ForwardStepper::Result ForwardStepper::step(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& lambda) const {
    const int n = n_, m = m_;
    Eigen::VectorXd lp, u;
    if (h22_ok_) {
        lp = H22_.fullPivLu().solve(lambda - H21_ * x);
    } else {
        lp = lambda;
    }
    u = Eigen::VectorXd::Zero(m);
    {
        // refine the initial control from the linear stationarity equation
        Eigen::VectorXd xu(n + m);
        xu << x, u;
        Eigen::MatrixXd fu(n, m);
        for (int b = 0; b < m; ++b) fu.col(b) = df_[n + b].eval(xu);
        Eigen::VectorXd lu_(m);
        for (int b = 0; b < m; ++b) lu_[b] = dl_[n + b].eval_scalar(xu);
        Eigen::MatrixXd Ruu(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                Ruu(a, b) = d2l_[n + a][n + b].eval_scalar(xu) +
                            lp.dot(d2f_[n + a][n + b].eval(xu));
        u = -Ruu.ldlt().solve(lu_ + fu.transpose() * lp);
    }

    const double tol = 1e-12 * (1.0 + lambda.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd F;
    Eigen::MatrixXd Jw;
    Result res;
    for (int it = 0; it < 100; ++it) {
        residual_and_jacobian(x, lambda, u, lp, &F, &Jw, nullptr);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Jw);
        if (!lu.isInvertible())
            throw std::runtime_error(
                "forward_step: singular stationarity Jacobian (bidirectional-only "
                "system)");
        const double fn = F.lpNorm<Eigen::Infinity>();
        if (fn <= tol) {
            res.newton_iters = it;
            Eigen::VectorXd xu(n + m);
            xu << x, u;
            res.x_next = f_.eval(xu);
            res.lambda_next = lp;
            res.u = u;
            return res;
        }
        Eigen::VectorXd dw = lu.solve(-F);
        // backtracking on the residual norm
        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            Eigen::VectorXd u_try = u + alpha * dw.head(m);
            Eigen::VectorXd lp_try = lp + alpha * dw.tail(n);
            Eigen::VectorXd F_try;
            residual_and_jacobian(x, lambda, u_try, lp_try, &F_try, nullptr, nullptr);
            if (F_try.lpNorm<Eigen::Infinity>() < fn) {
                u = u_try;
                lp = lp_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw std::runtime_error("forward_step: Newton line search stalled");
    }
    throw std::runtime_error("forward_step: Newton did not converge");
}

Eigen::MatrixXd ForwardStepper::tangent(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& lambda) const {
    const int n = n_, m = m_;
    const Result r = step(x, lambda);
    Eigen::VectorXd F;
    Eigen::MatrixXd Jw, Jv;
    residual_and_jacobian(x, lambda, r.u, r.lambda_next, &F, &Jw, &Jv);
    const Eigen::MatrixXd dw = -Jw.partialPivLu().solve(Jv);  // (m+n) x 2n

    Eigen::VectorXd xu(n + m);
    xu << x, r.u;
    Eigen::MatrixXd fx(n, n), fu(n, m);
    for (int a = 0; a < n; ++a) fx.col(a) = df_[a].eval(xu);
    for (int b = 0; b < m; ++b) fu.col(b) = df_[n + b].eval(xu);

    Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(n, 2 * n);
    dv.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topRows(n) = fx * dv + fu * dw.topRows(m);
    out.bottomRows(n) = dw.bottomRows(n);
    return out;
}

PolySeries forward_map_series(const ControlProblem& p, int trunc) {
    if (p.mode != Mode::Discrete)
        throw std::invalid_argument("forward_map_series: discrete problem expected");
    const int n = p.n, m = p.m;
    const int NV = 2 * n + m + n;  // (x, lambda, u, lambda+)

    std::vector<int> xu_map(n + m);
    for (int i = 0; i < n; ++i) xu_map[i] = i;
    for (int j = 0; j < m; ++j) xu_map[n + j] = 2 * n + j;

    auto lp_series = [&](int k) {  // lambda+_k as a linear series over NV vars
        PolySeries s(NV, 1, trunc);
        HomogeneousPoly h(NV, 1);
        MultiIndex e(NV, 0);
        e[2 * n + m + k] = 1;
        h.coeffs[monomial_rank(e)] = 1.0;
        s.add_part(0, h);
        return s;
    };

    PolySeries F(NV, n + m, trunc);
    for (int i = 0; i < n; ++i) {
        PolySeries acc = embed_vars(series_partial(p.l, i), NV, xu_map);
        for (int k = 0; k < n; ++k) {
            PolySeries dfk =
                embed_vars(series_component(series_partial(p.f, i), k), NV, xu_map);
            acc = series_add(acc, series_mul(dfk, lp_series(k), trunc));
        }
        HomogeneousPoly h(NV, 1);
        MultiIndex e(NV, 0);
        e[n + i] = 1;  // -lambda_i
        h.coeffs[monomial_rank(e)] = -1.0;
        acc.add_part(0, h);
        F.comps[i] = acc.comps[0];
    }
    for (int j = 0; j < m; ++j) {
        PolySeries acc = embed_vars(series_partial(p.l, n + j), NV, xu_map);
        for (int k = 0; k < n; ++k) {
            PolySeries dfk = embed_vars(
                series_component(series_partial(p.f, n + j), k), NV, xu_map);
            acc = series_add(acc, series_mul(dfk, lp_series(k), trunc));
        }
        F.comps[n + j] = acc.comps[0];
    }

    PolySeries w = implicit_series(F, 2 * n, m + n, trunc);

    // x+ = f(x, u(x, lambda)), lambda+ = w's trailing block
    PolySeries id_v = identity_series(2 * n, trunc);
    PolySeries subst(2 * n, n + m, trunc);
    for (int i = 0; i < n; ++i) subst.comps[i] = id_v.comps[i];
    for (int j = 0; j < m; ++j) subst.comps[n + j] = w.comps[j];
    PolySeries x_plus = compose(p.f, subst, trunc);
    PolySeries lambda_plus(2 * n, n, trunc);
    for (int k = 0; k < n; ++k) lambda_plus.comps[k] = w.comps[m + k];
    return series_stack(x_plus, lambda_plus);
}

StableManifoldSeries stable_manifold_from_series(const SeriesSolution& sol) {
    return {grad(sol.pi)};
}

InvarianceReport invariance_check(const PolySeries& phi, const ControlProblem& p) {
    ForwardStepper stepper(p);
    const int n = p.n;

    std::vector<Eigen::VectorXd> dirs;
    if (n == 1) {
        dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
        dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    } else {
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e[i] = 1.0;
            dirs.push_back(e);
            dirs.push_back(-e);
        }
        dirs.push_back(Eigen::VectorXd::Constant(n, 1.0).normalized());
    }

    InvarianceReport rep;
    for (double expo : {1.0, 1.5, 2.0, 2.5}) {
        double eps = std::pow(10.0, -expo);
        double defect = 0.0;
        bool ok = false;
        for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
            try {
                defect = 0.0;
                for (const auto& dir : dirs) {
                    Eigen::VectorXd x = eps * dir;
                    Eigen::VectorXd lam = phi.eval(x);
                    auto r = stepper.step(x, lam);
                    Eigen::VectorXd gap = r.lambda_next - phi.eval(r.x_next);
                    defect = std::max(defect, gap.lpNorm<Eigen::Infinity>());
                }
                ok = true;
            } catch (const std::runtime_error&) {
                eps *= 0.5;  // shrink toward the basin of the Newton solve
            }
        }
        if (!ok) throw std::runtime_error("invariance_check: forward step failed");
        rep.scales.push_back(eps);
        rep.defects.push_back(defect);
    }
    // least-squares slope; defects at noise level count as exact
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (size_t i = 0; i < rep.scales.size(); ++i) {
        if (rep.defects[i] <= 1e-14) continue;
        const double lx = std::log(rep.scales[i]);
        const double ly = std::log(rep.defects[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++cnt;
    }
    rep.slope = (cnt < 2) ? 1e9 : (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return rep;
}

// Matrix of Phi -> A_u Phi(z) - Phi(A_s z) on (outputs x monomials of degree d).
Eigen::MatrixXd manifold_level_operator(const Eigen::MatrixXd& A_s,
                                        const Eigen::MatrixXd& A_u, int d) {
    const int ns = static_cast<int>(A_s.rows());
    const int nu = static_cast<int>(A_u.rows());
    const int N = static_cast<int>(monomial_count(ns, d));
    Eigen::MatrixXd Op = Eigen::MatrixXd::Zero(nu * N, nu * N);
    PolySeries lin = linear_series(A_s, d);
    for (int alpha = 0; alpha < N; ++alpha) {
        PolySeries mono(ns, 1, d);
        HomogeneousPoly h(ns, d);
        h.coeffs[alpha] = 1.0;
        mono.add_part(0, h);
        const Eigen::VectorXd comp = compose(mono, lin, d).hom_part(0, d).coeffs;
        for (int a = 0; a < nu; ++a) {
            const int col = a * N + alpha;
            for (int b = 0; b < nu; ++b)
                Op(b * N + alpha, col) += A_u(b, a);
            Op.block(a * N, col, N, 1) -= comp;
        }
    }
    return Op;
}

PhiZSeries solve_phi_taylor(const ControlProblem& p, int r) {
    if (r < 3) throw std::invalid_argument("solve_phi_taylor: r >= 3 required");
    const int n = p.n;
    const LqrData lqr = p.extract_lqr();
    const HamiltonianBlocks blocks = HamiltonianBlocks::from_lqr(lqr);
    const Eigen::MatrixXd HF = forward_matrix(blocks);

    for (const auto& mu : eigenvalues(HF))
        if (std::abs(std::abs(mu) - 1.0) <= 1e-6)
            throw std::runtime_error("solve_phi_taylor: eigenvalue on the unit circle");

    SpectralSplit split = ordered_schur_split(
        HF, [](std::complex<double> mu) { return std::abs(mu) < 1.0; });

    // Rescale the unstable basis so the transform is symplectic; both invariant
    // subspaces are Lagrangian, so V_s' J V_u is invertible and the rescaled
    // T satisfies T' J T = J.  This is what makes z_u = phi(z_s) a closed
    // (symmetric-Jacobian) graph in the new coordinates.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    J.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd Vs = split.T.leftCols(n);
    Eigen::MatrixXd Vu = split.T.rightCols(n);
    Eigen::MatrixXd C = Vs.transpose() * J * Vu;
    Eigen::FullPivLU<Eigen::MatrixXd> Clu(C);
    if (!Clu.isInvertible())
        throw std::runtime_error("solve_phi_taylor: degenerate Lagrangian pairing");
    Vu = Vu * Clu.inverse();

    PhiZSeries out;
    out.T.resize(2 * n, 2 * n);
    out.T << Vs, Vu;
    if (check_symplectic(out.T) > 1e-8)
        throw std::runtime_error("solve_phi_taylor: split transform not symplectic");
    out.T_inv = -J * out.T.transpose() * J;  // inverse of a symplectic matrix
    Eigen::MatrixXd D = out.T_inv * HF * out.T;
    out.A_s = D.topLeftCorner(n, n);
    out.A_u = D.bottomRightCorner(n, n);
    if (D.topRightCorner(n, n).lpNorm<Eigen::Infinity>() > 1e-8 ||
        D.bottomLeftCorner(n, n).lpNorm<Eigen::Infinity>() > 1e-8)
        throw std::runtime_error("solve_phi_taylor: block diagonalization defect");
    out.separation = split.separation;

    const int trunc = r - 1;
    PolySeries G = forward_map_series(p, trunc);
    PolySeries Gz = compose(linear_series(out.T_inv, trunc),
                            compose(G, linear_series(out.T, trunc), trunc), trunc);

    // linear part must be the decoupled pair
    Eigen::MatrixXd lin(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        const HomogeneousPoly h = Gz.hom_part(i, 1);
        for (int j = 0; j < 2 * n; ++j) {
            MultiIndex e(2 * n, 0);
            e[j] = 1;
            lin(i, j) = h.coeffs[monomial_rank(e)];
        }
    }
    if ((lin.topRightCorner(n, n)).lpNorm<Eigen::Infinity>() > 1e-8 ||
        (lin.bottomLeftCorner(n, n)).lpNorm<Eigen::Infinity>() > 1e-8)
        throw std::runtime_error("solve_phi_taylor: block diagonalization defect");

    PolySeries phi(n, n, trunc);  // z_u = phi(z_s), starts empty (quadratic and up)
    for (int d = 2; d <= trunc; ++d) {
        PolySeries subst = series_stack(identity_series(n, d), series_truncate(phi, d));
        PolySeries Gz_cl = compose(Gz, subst, d);
        PolySeries Gz_s(n, n, d), Gz_u(n, n, d);
        for (int i = 0; i < n; ++i) {
            Gz_s.comps[i] = Gz_cl.comps[i];
            Gz_u.comps[i] = Gz_cl.comps[n + i];
        }
        PolySeries phi_of_Gs = compose(series_truncate(phi, d), Gz_s, d);
        const int N = static_cast<int>(monomial_count(n, d));
        Eigen::VectorXd rhs(n * N);
        for (int a = 0; a < n; ++a) {
            const Eigen::VectorXd defect =
                Gz_u.hom_part(a, d).coeffs - phi_of_Gs.hom_part(a, d).coeffs;
            rhs.segment(a * N, N) = -defect;
        }
        Eigen::MatrixXd Op = manifold_level_operator(out.A_s, out.A_u, d);
        Eigen::VectorXd sol = Op.partialPivLu().solve(rhs);
        if ((Op * sol - rhs).lpNorm<Eigen::Infinity>() >
            1e-9 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
            throw std::runtime_error("solve_phi_taylor: level solve ill-conditioned");
        for (int a = 0; a < n; ++a) {
            HomogeneousPoly h(n, d);
            h.coeffs = sol.segment(a * N, N);
            phi.add_part(a, h);
        }
    }
    out.phi_z = phi;
    return out;
}

PolySeries phi_z_to_xlambda(const PhiZSeries& pz, int trunc) {
    const int n = static_cast<int>(pz.A_s.rows());
    PolySeries subst =
        series_stack(identity_series(n, trunc), series_truncate(pz.phi_z, trunc));
    PolySeries XL = compose(linear_series(pz.T, trunc), subst, trunc);
    PolySeries X(n, n, trunc), Lm(n, n, trunc);
    for (int i = 0; i < n; ++i) {
        X.comps[i] = XL.comps[i];
        Lm.comps[i] = XL.comps[n + i];
    }
    PolySeries z_of_x = invert_series(X, trunc);
    return compose(Lm, z_of_x, trunc);
}

double closedness_check(const PolySeries& phi,
                        const std::vector<Eigen::VectorXd>& samples) {
    const int n = phi.n_vars;
    if (phi.n_out() != n)
        throw std::invalid_argument("closedness_check: phi must be square");
    std::vector<std::vector<PolySeries>> dphi(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            dphi[i].push_back(series_partial(series_component(phi, i), j));
    double worst = 0.0;
    for (const auto& x : samples) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                worst = std::max(worst, std::abs(dphi[i][j].eval_scalar(x) -
                                                 dphi[j][i].eval_scalar(x)));
    }
    return worst;
}

}  // namespace hjb
