#include "hjbseries/dpe.hpp"

#include <stdexcept>

#include "hjbseries/linalg.hpp"

namespace hjb {

LqrData ControlProblem::extract_lqr() const {
    LqrData d;
    d.A.setZero(n, n);
    d.B.setZero(n, m);
    d.Q.setZero(n, n);
    d.R.setZero(m, m);
    d.S.setZero(n, m);

    for (int i = 0; i < n; ++i) {
        const HomogeneousPoly lin = f.hom_part(i, 1);
        for (int j = 0; j < n + m; ++j) {
            MultiIndex e(n + m, 0);
            e[j] = 1;
            const double c = lin.coeffs[monomial_rank(e)];
            if (j < n) d.A(i, j) = c;
            else d.B(i, j - n) = c;
        }
    }

    const HomogeneousPoly quad = l.hom_part(0, 2);
    auto coeff = [&](int a, int b) {  // variables a<=b in stacked index
        MultiIndex e(n + m, 0);
        e[a] += 1;
        e[b] += 1;
        return quad.coeffs[monomial_rank(e)];
    };
    for (int i = 0; i < n; ++i) {
        d.Q(i, i) = 2.0 * coeff(i, i);
        for (int j = i + 1; j < n; ++j) d.Q(i, j) = d.Q(j, i) = coeff(i, j);
    }
    for (int i = 0; i < m; ++i) {
        d.R(i, i) = 2.0 * coeff(n + i, n + i);
        for (int j = i + 1; j < m; ++j) d.R(i, j) = d.R(j, i) = coeff(n + i, n + j);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) d.S(i, j) = coeff(i, n + j);
    return d;
}

void ControlProblem::validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("ControlProblem: n,m >= 1 required");
    if (f.n_vars != n + m || f.n_out() != n)
        throw std::invalid_argument("ControlProblem: f shape mismatch");
    if (l.n_vars != n + m || l.n_out() != 1)
        throw std::invalid_argument("ControlProblem: l must be scalar over (x,u)");
    for (int c = 0; c < n; ++c) {
        auto it = f.comps[c].find(0);
        if (it != f.comps[c].end() && !it->second.is_zero())
            throw std::invalid_argument("ControlProblem: f(0,0) != 0");
    }
    for (int d0 : {0, 1}) {
        auto it = l.comps[0].find(d0);
        if (it != l.comps[0].end() && !it->second.is_zero())
            throw std::invalid_argument(
                "ControlProblem: l must have no constant or linear terms");
    }
    extract_lqr().validate();
}

PolySeries closed_loop_subst(const PolySeries& kappa, int n, int m, int trunc) {
    PolySeries id_x = identity_series(n, trunc);
    PolySeries k = series_truncate(kappa, trunc);
    if (k.n_vars != n || k.n_out() != m)
        throw std::invalid_argument("closed_loop_subst: kappa shape mismatch");
    return series_stack(id_x, k);
}

PolySeries feedback_shift_subst(const PolySeries& kappa, int n, int m, int trunc) {
    if (kappa.n_vars != n || kappa.n_out() != m)
        throw std::invalid_argument("feedback_shift_subst: kappa shape mismatch");
    std::vector<int> xmap(n);
    for (int i = 0; i < n; ++i) xmap[i] = i;
    PolySeries k_xu = embed_vars(series_truncate(kappa, trunc), n + m, xmap);
    PolySeries out(n + m, n + m, trunc);
    // x components
    for (int i = 0; i < n; ++i) {
        HomogeneousPoly h(n + m, 1);
        MultiIndex e(n + m, 0);
        e[i] = 1;
        h.coeffs[monomial_rank(e)] = 1.0;
        out.add_part(i, h);
    }
    // u components: kappa(x) + u
    for (int j = 0; j < m; ++j) {
        for (const auto& [d, h] : k_xu.comps[j]) out.add_part(n + j, h);
        HomogeneousPoly h(n + m, 1);
        MultiIndex e(n + m, 0);
        e[n + j] = 1;
        h.coeffs[monomial_rank(e)] = 1.0;
        out.add_part(n + j, h);
    }
    return out;
}

namespace {

std::vector<int> x_indices(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

Eigen::MatrixXd dpe_level_operator(const Eigen::MatrixXd& M, int d) {
    const int n = static_cast<int>(M.rows());
    const auto monos = enumerate_monomials(n, d);
    const int N = static_cast<int>(monos.size());
    Eigen::MatrixXd Op = Eigen::MatrixXd::Identity(N, N);
    PolySeries lin = linear_series(M, d);
    for (int a = 0; a < N; ++a) {
        PolySeries mono(n, 1, d);
        HomogeneousPoly h(n, d);
        h.coeffs[a] = 1.0;
        mono.add_part(0, h);
        PolySeries img = compose(mono, lin, d);
        Op.col(a) -= img.hom_part(0, d).coeffs;
    }
    return Op;
}

namespace {

HomogeneousPoly solve_level(const Eigen::MatrixXd& Op, const HomogeneousPoly& rhs) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Op);
    Eigen::VectorXd sol = lu.solve(rhs.coeffs);
    const double defect = (Op * sol - rhs.coeffs).lpNorm<Eigen::Infinity>();
    if (defect > 1e-9 * (1.0 + rhs.coeffs.lpNorm<Eigen::Infinity>()))
        throw std::runtime_error("series level solve: operator ill-conditioned");
    HomogeneousPoly q(rhs.n_vars, rhs.degree);
    q.coeffs = sol;
    return q;
}

}  // namespace

HomogeneousPoly dpe_level_rhs(const ControlProblem& p, const PolySeries& pi_known,
                              const PolySeries& kappa_known, int d) {
    const int n = p.n, m = p.m;
    PolySeries subst = closed_loop_subst(kappa_known, n, m, d + 1);
    PolySeries f_cl = compose(p.f, subst, d + 1);
    PolySeries l_cl = compose(p.l, subst, d + 1);
    PolySeries pi_of_f = compose(series_truncate(pi_known, d + 1), f_cl, d + 1);
    HomogeneousPoly rho = pi_known.hom_part(0, d + 1);
    rho = hom_add(rho, hom_scale(pi_of_f.hom_part(0, d + 1), -1.0));
    rho = hom_add(rho, hom_scale(l_cl.hom_part(0, d + 1), -1.0));
    return rho;
}

SeriesSolution solve_dpe_series(const ControlProblem& p, int r) {
    if (p.mode != Mode::Discrete)
        throw std::invalid_argument("solve_dpe_series: discrete problem expected");
    if (r < 3) throw std::invalid_argument("solve_dpe_series: r >= 3 required");
    p.validate();
    const int n = p.n, m = p.m;

    const LqrData lqr = p.extract_lqr();
    const RiccatiSolution rs = solve_dtare(lqr);
    const Eigen::MatrixXd M = lqr.A + lqr.B * rs.K;
    const Eigen::MatrixXd W = lqr.B.transpose() * rs.P * lqr.B + lqr.R;
    const Eigen::LDLT<Eigen::MatrixXd> Wld(W);

    SeriesSolution sol;
    sol.P = rs.P;
    sol.K = rs.K;
    sol.mode = Mode::Discrete;
    sol.trunc = r;
    sol.pi = quadratic_form_series(rs.P, r);
    sol.kappa = linear_series(rs.K, r - 1);

    for (int d = 2; d <= r - 1; ++d) {
        // cost correction of degree d+1
        HomogeneousPoly rho = dpe_level_rhs(p, sol.pi, sol.kappa, d);
        Eigen::MatrixXd Op = dpe_level_operator(M, d + 1);
        sol.pi.add_part(0, solve_level(Op, hom_scale(rho, -1.0)));

        // feedback correction of degree d from the u-gradient condition
        PolySeries shift = feedback_shift_subst(sol.kappa, n, m, d + 1);
        PolySeries f_bar = compose(p.f, shift, d + 1);
        PolySeries l_bar = compose(p.l, shift, d + 1);
        PolySeries grad_pi = grad(series_truncate(sol.pi, d + 1));
        PolySeries grad_pi_f = compose(grad_pi, f_bar, d);

        PolySeries G(n + m, m, d);
        for (int j = 0; j < m; ++j) {
            PolySeries fu_j = series_partial(f_bar, n + j);
            PolySeries acc(n + m, 1, d);
            for (int i = 0; i < n; ++i)
                acc = series_add(acc, series_mul(series_component(grad_pi_f, i),
                                                 series_component(fu_j, i), d));
            acc = series_add(acc, series_component(series_partial(l_bar, n + j), 0));
            G.comps[j] = acc.comps[0];
        }
        PolySeries G0 = project_vars(G, x_indices(n));
        Eigen::MatrixXd gmat(m, monomial_count(n, d));
        for (int j = 0; j < m; ++j) gmat.row(j) = G0.hom_part(j, d).coeffs.transpose();
        Eigen::MatrixXd kd = -Wld.solve(gmat);
        for (int j = 0; j < m; ++j) {
            HomogeneousPoly h(n, d);
            h.coeffs = kd.row(j).transpose();
            sol.kappa.add_part(j, h);
        }
    }
    return sol;
}

DpeResidualReport dpe_residual(const SeriesSolution& sol, const ControlProblem& p,
                               int r) {
    const int n = p.n, m = p.m;
    PolySeries subst = closed_loop_subst(sol.kappa, n, m, r);
    PolySeries f_cl = compose(p.f, subst, r);
    PolySeries l_cl = compose(p.l, subst, r);
    PolySeries pi_r = series_truncate(sol.pi, r);
    PolySeries e1 = series_add(pi_r, series_scale(series_add(compose(pi_r, f_cl, r), l_cl), -1.0));

    PolySeries grad_pi = grad(pi_r);
    PolySeries grad_pi_f = compose(grad_pi, f_cl, r - 1);
    // partial of f wrt u, then evaluated on the closed loop
    DpeResidualReport rep;
    rep.eq1.assign(r + 1, 0.0);
    rep.eq2.assign(r, 0.0);
    for (int d = 0; d <= r; ++d) rep.eq1[d] = e1.coeff_norm(d);

    for (int j = 0; j < m; ++j) {
        PolySeries fu = series_partial(p.f, n + j);
        PolySeries lu = series_partial(p.l, n + j);
        PolySeries fu_cl = compose(fu, subst, r - 1);
        PolySeries lu_cl = compose(series_component(lu, 0), subst, r - 1);
        PolySeries acc(n, 1, r - 1);
        for (int i = 0; i < n; ++i)
            acc = series_add(acc, series_mul(series_component(grad_pi_f, i),
                                             series_component(fu_cl, i), r - 1));
        acc = series_add(acc, lu_cl);
        for (int d = 0; d <= r - 1; ++d)
            rep.eq2[d] = std::max(rep.eq2[d], acc.coeff_norm(d));
    }
    return rep;
}

}  // namespace hjb
