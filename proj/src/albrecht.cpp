#include "hjbseries/albrecht.hpp"

#include <stdexcept>

#include "hjbseries/linalg.hpp"

namespace hjb {

namespace {

std::vector<int> x_indices(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

Eigen::MatrixXd hjb_level_operator(const Eigen::MatrixXd& M, int d) {
    const int n = static_cast<int>(M.rows());
    const int N = static_cast<int>(monomial_count(n, d));
    Eigen::MatrixXd Op = Eigen::MatrixXd::Zero(N, N);
    PolySeries lin = linear_series(M, d);
    for (int a = 0; a < N; ++a) {
        PolySeries mono(n, 1, d);
        HomogeneousPoly h(n, d);
        h.coeffs[a] = 1.0;
        mono.add_part(0, h);
        PolySeries g = grad(mono);
        HomogeneousPoly acc(n, d);
        for (int i = 0; i < n; ++i)
            acc = hom_add(acc, hom_mul(g.hom_part(i, d - 1), lin.hom_part(i, 1)));
        Op.col(a) = acc.coeffs;
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

HomogeneousPoly hjb_level_rhs(const ControlProblem& p, const PolySeries& pi_known,
                              const PolySeries& kappa_known, int d) {
    PolySeries subst = closed_loop_subst(kappa_known, p.n, p.m, d + 1);
    PolySeries f_cl = compose(p.f, subst, d + 1);
    PolySeries l_cl = compose(p.l, subst, d + 1);
    PolySeries grad_pi = grad(series_truncate(pi_known, d + 1));
    HomogeneousPoly rho(p.n, d + 1);
    for (int i = 0; i < p.n; ++i) {
        PolySeries prod = series_mul(series_component(grad_pi, i),
                                     series_component(f_cl, i), d + 1);
        rho = hom_add(rho, prod.hom_part(0, d + 1));
    }
    rho = hom_add(rho, l_cl.hom_part(0, d + 1));
    return rho;
}

SeriesSolution solve_hjb_series(const ControlProblem& p, int r) {
    if (p.mode != Mode::Continuous)
        throw std::invalid_argument("solve_hjb_series: continuous problem expected");
    if (r < 3) throw std::invalid_argument("solve_hjb_series: r >= 3 required");
    p.validate();
    const int n = p.n, m = p.m;

    const LqrData lqr = p.extract_lqr();
    const RiccatiSolution rs = solve_care(lqr);
    const Eigen::MatrixXd M = lqr.A + lqr.B * rs.K;
    const Eigen::LDLT<Eigen::MatrixXd> Rld(lqr.R);

    SeriesSolution sol;
    sol.P = rs.P;
    sol.K = rs.K;
    sol.mode = Mode::Continuous;
    sol.trunc = r;
    sol.pi = quadratic_form_series(rs.P, r);
    sol.kappa = linear_series(rs.K, r - 1);

    for (int d = 2; d <= r - 1; ++d) {
        HomogeneousPoly rho = hjb_level_rhs(p, sol.pi, sol.kappa, d);
        Eigen::MatrixXd Op = hjb_level_operator(M, d + 1);
        sol.pi.add_part(0, solve_level(Op, hom_scale(rho, -1.0)));

        PolySeries shift = feedback_shift_subst(sol.kappa, n, m, d + 1);
        PolySeries f_bar = compose(p.f, shift, d + 1);
        PolySeries l_bar = compose(p.l, shift, d + 1);
        // gradient taken at x itself in the continuous case
        PolySeries grad_pi = grad(series_truncate(sol.pi, d + 1));
        PolySeries grad_pi_xu = embed_vars(grad_pi, n + m, x_indices(n));

        PolySeries G(n + m, m, d);
        for (int j = 0; j < m; ++j) {
            PolySeries fu_j = series_partial(f_bar, n + j);
            PolySeries acc(n + m, 1, d);
            for (int i = 0; i < n; ++i)
                acc = series_add(acc, series_mul(series_component(grad_pi_xu, i),
                                                 series_component(fu_j, i), d));
            acc = series_add(acc, series_component(series_partial(l_bar, n + j), 0));
            G.comps[j] = acc.comps[0];
        }
        PolySeries G0 = project_vars(G, x_indices(n));
        Eigen::MatrixXd gmat(m, monomial_count(n, d));
        for (int j = 0; j < m; ++j) gmat.row(j) = G0.hom_part(j, d).coeffs.transpose();
        Eigen::MatrixXd kd = -Rld.solve(gmat);
        for (int j = 0; j < m; ++j) {
            HomogeneousPoly h(n, d);
            h.coeffs = kd.row(j).transpose();
            sol.kappa.add_part(j, h);
        }
    }
    return sol;
}

HjbResidualReport hjb_residual(const SeriesSolution& sol, const ControlProblem& p,
                               const std::vector<Eigen::VectorXd>& points) {
    const int n = p.n, m = p.m;
    PolySeries grad_pi = grad(sol.pi);
    std::vector<PolySeries> fu, lu;
    for (int j = 0; j < m; ++j) {
        fu.push_back(series_partial(p.f, n + j));
        lu.push_back(series_partial(p.l, n + j));
    }
    HjbResidualReport rep;
    for (const auto& x : points) {
        Eigen::VectorXd u = sol.kappa.eval(x);
        Eigen::VectorXd xu(n + m);
        xu << x, u;
        const Eigen::VectorXd fv = p.f.eval(xu);
        const double lv = p.l.eval_scalar(xu);
        const Eigen::VectorXd gp = grad_pi.eval(x);
        rep.max_eq1 = std::max(rep.max_eq1, std::abs(gp.dot(fv) + lv));
        for (int j = 0; j < m; ++j) {
            const double acc = gp.dot(fu[j].eval(xu)) + lu[j].eval_scalar(xu);
            rep.max_eq2 = std::max(rep.max_eq2, std::abs(acc));
        }
    }
    return rep;
}

DpeResidualReport hjb_series_residual(const SeriesSolution& sol,
                                      const ControlProblem& p, int r) {
    const int n = p.n, m = p.m;
    PolySeries subst = closed_loop_subst(sol.kappa, n, m, r);
    PolySeries f_cl = compose(p.f, subst, r);
    PolySeries l_cl = compose(p.l, subst, r);
    PolySeries pi_r = series_truncate(sol.pi, r);
    PolySeries grad_pi = grad(pi_r);

    PolySeries e1(n, 1, r);
    for (int i = 0; i < n; ++i)
        e1 = series_add(e1, series_mul(series_component(grad_pi, i),
                                       series_component(f_cl, i), r));
    e1 = series_add(e1, l_cl);

    DpeResidualReport rep;
    rep.eq1.assign(r + 1, 0.0);
    rep.eq2.assign(r, 0.0);
    for (int d = 0; d <= r; ++d) rep.eq1[d] = e1.coeff_norm(d);

    for (int j = 0; j < m; ++j) {
        PolySeries fu_cl = compose(series_partial(p.f, n + j), subst, r - 1);
        PolySeries lu_cl =
            compose(series_component(series_partial(p.l, n + j), 0), subst, r - 1);
        PolySeries acc(n, 1, r - 1);
        for (int i = 0; i < n; ++i)
            acc = series_add(acc, series_mul(series_component(grad_pi, i),
                                             series_component(fu_cl, i), r - 1));
        acc = series_add(acc, lu_cl);
        for (int d = 0; d <= r - 1; ++d)
            rep.eq2[d] = std::max(rep.eq2[d], acc.coeff_norm(d));
    }
    return rep;
}

}  // namespace hjb
