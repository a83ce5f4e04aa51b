// Acceptance suite: one line per criterion, nonzero exit = number of failures.
// Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "hjbseries/albrecht.hpp"
#include "hjbseries/hamiltonian.hpp"
#include "hjbseries/lyapunov.hpp"
#include "hjbseries/oracle.hpp"
#include "hjbseries/patch.hpp"
#include "hjbseries/problem_io.hpp"
#include "test_util.hpp"

using namespace hjb;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void report(int num, const std::string& name, bool pass, const std::string& detail,
            double seconds, double budget) {
    const bool ok = pass && seconds < budget;
    if (!ok) ++g_failures;
    std::printf("%s criterion %d: %s — %s (%.2fs of %.3gs budget)\n",
                ok ? "PASS" : "FAIL", num, name.c_str(), detail.c_str(), seconds,
                budget);
}

const char* kPragerJson = R"json({
  "name": "prager",
  "mode": "continuous",
  "n": 1, "m": 1,
  "f_degree": 3, "l_degree": 4,
  "affine1d": {
    "g0": "0", "g1": "x+1",
    "l0": "ln(1+x)^2", "l1": "0", "l2": "1",
    "domain": [-1.0, 4.0]
  },
  "exact": { "pi": "ln(1+x)^2", "kappa": "-ln(1+x)" }
})json";

void set_coeff(PolySeries& s, int comp, const MultiIndex& m, double v) {
    HomogeneousPoly h(s.n_vars, multi_degree(m));
    h.coeff(m) = v;
    s.add_part(comp, h);
}

// f = u, l = x^2/2 + x^3 + u^2/2 (exact Bellman fixed point x^2/2 + x^3)
ControlProblem exact_discrete_problem() {
    ControlProblem p;
    p.mode = Mode::Discrete;
    p.n = 1;
    p.m = 1;
    p.f = PolySeries(2, 1, 4);
    set_coeff(p.f, 0, {0, 1}, 1.0);
    p.l = PolySeries(2, 1, 5);
    set_coeff(p.l, 0, {2, 0}, 0.5);
    set_coeff(p.l, 0, {3, 0}, 1.0);
    set_coeff(p.l, 0, {0, 2}, 0.5);
    return p;
}

void criterion_1() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        LoadedProblem lp = load_problem_text(kPragerJson);
        SeriesSolution sol = solve_hjb_series(*lp.control, 4);
        const double pi_c[3] = {sol.pi.hom_part(0, 2).coeffs[0],
                                sol.pi.hom_part(0, 3).coeffs[0],
                                sol.pi.hom_part(0, 4).coeffs[0]};
        const double ka_c[3] = {sol.kappa.hom_part(0, 1).coeffs[0],
                                sol.kappa.hom_part(0, 2).coeffs[0],
                                sol.kappa.hom_part(0, 3).coeffs[0]};
        const double pi_ref[3] = {1.0, -1.0, 11.0 / 12.0};
        const double ka_ref[3] = {-1.0, 0.5, -1.0 / 3.0};
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, std::abs(pi_c[i] - pi_ref[i]));
            worst = std::max(worst, std::abs(ka_c[i] - ka_ref[i]));
        }
        pass = worst <= 1e-10;
        detail = "max coefficient gap " + std::to_string(worst);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(1, "Prager series golden values", pass, detail, t.seconds(), 1.0);
}

void criterion_2() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        LqrData d;
        d.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
        d.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
        d.Q = Eigen::MatrixXd::Constant(1, 1, 1.0);
        d.R = Eigen::MatrixXd::Constant(1, 1, 1.0);
        d.S = Eigen::MatrixXd::Constant(1, 1, 0.0);
        RiccatiSolution sol = solve_dtare(d);
        const double rho = spectral_radius(d.A + d.B * sol.K);
        const double gP = std::abs(sol.P(0, 0) - 1.6180339887);
        const double gK = std::abs(sol.K(0, 0) - (-0.6180339887));
        const double gR = std::abs(rho - 0.3819660113);
        pass = gP <= 1e-9 && gK <= 1e-9 && gR <= 1e-9;
        detail = "gaps P " + std::to_string(gP) + ", K " + std::to_string(gK) +
                 ", rho " + std::to_string(gR);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(2, "scalar DTARE closed form", pass, detail, t.seconds(), 0.1);
}

void criterion_3() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        ControlProblem p = exact_discrete_problem();
        SeriesSolution sol = solve_dpe_series(p, 4);
        double worst = std::abs(sol.pi.hom_part(0, 2).coeffs[0] - 0.5);
        worst = std::max(worst, std::abs(sol.pi.hom_part(0, 3).coeffs[0] - 1.0));
        worst = std::max(worst, std::abs(sol.pi.hom_part(0, 4).coeffs[0]));
        for (int dd = 1; dd <= 3; ++dd)
            worst = std::max(
                worst, sol.kappa.hom_part(0, dd).coeffs.lpNorm<Eigen::Infinity>() *
                           (dd == 1 ? 1.0 : 1.0));
        const bool coeff_ok = worst <= 1e-10;

        Box box;
        box.lo = Eigen::VectorXd::Constant(1, -0.2);
        box.hi = Eigen::VectorXd::Constant(1, 0.2);
        Box ubox;
        ubox.lo = Eigen::VectorXd::Constant(1, -0.4);
        ubox.hi = Eigen::VectorXd::Constant(1, 0.4);
        GridValueFunction V = value_iteration(p, box, {401}, ubox, {41}, 1e-10, 400);
        double vgap = 0.0;
        for (int k = 0; k <= 100; ++k) {
            Eigen::VectorXd x(1);
            x << -0.2 + 0.4 * k / 100;
            vgap = std::max(vgap, std::abs(V.value_at(x) - sol.pi.eval_scalar(x)));
        }
        pass = coeff_ok && vgap <= 1e-4;
        detail = "coefficient gap " + std::to_string(worst) + ", oracle gap " +
                 std::to_string(vgap);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(3, "discrete exact problem vs value iteration", pass, detail, t.seconds(),
           30.0);
}

void criterion_4() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        std::mt19937 rng(20260809);
        int done = 0;
        double worst_sympl = 0.0, worst_pair = 0.0, worst_match = 0.0;
        double min_circle_gap = 1e300;
        while (done < 100) {
            const int n = 1 + static_cast<int>(rng() % 3);
            Eigen::MatrixXd A = testutil::random_matrix(rng, n, n);
            Eigen::MatrixXd B = testutil::random_matrix(rng, n, 1);
            Eigen::MatrixXd F = testutil::random_matrix(rng, n + 1, n + 1);
            Eigen::MatrixXd W = F.transpose() * F;
            W.bottomRightCorner(1, 1) += 0.5 * Eigen::MatrixXd::Identity(1, 1);
            LqrData d{A, B, W.topLeftCorner(n, n), W.bottomRightCorner(1, 1),
                      W.topRightCorner(n, 1)};
            if (!is_stabilizable(A, B, Mode::Discrete)) continue;
            if (!is_detectable(A, psd_sqrt_factor(d.Q), Mode::Discrete)) continue;
            HamiltonianBlocks blocks = HamiltonianBlocks::from_lqr(d);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(blocks.H22);
            if (!lu.isInvertible()) continue;  // bidirectional-only draw
            ++done;

            const Eigen::MatrixXd HF = forward_matrix(blocks);
            worst_sympl = std::max(worst_sympl, check_symplectic(HF));

            const PencilEigenvalues pe =
                pencil_eigenvalues(SymplecticPencil::from_blocks(blocks));
            for (const auto& mu : pe.finite) {
                min_circle_gap = std::min(min_circle_gap, std::abs(std::abs(mu) - 1.0));
                if (std::abs(mu) <= 1e-8) continue;
                double best = 1e300;
                for (const auto& nu : pe.finite)
                    best = std::min(best, std::abs(mu * nu - 1.0));
                worst_pair = std::max(worst_pair, best);
            }

            const RiccatiSolution rs = solve_dtare(d);
            const auto cl = eigenvalues(d.A + d.B * rs.K);
            for (const auto& mu : eigenvalues(HF)) {
                if (std::abs(mu) >= 1.0) continue;
                double best = 1e300;
                for (const auto& nu : cl) best = std::min(best, std::abs(mu - nu));
                worst_match = std::max(worst_match, best);
            }
        }
        pass = worst_sympl <= 1e-8 && worst_pair <= 1e-6 && min_circle_gap > 1e-6 &&
               worst_match <= 1e-8;
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "symplectic %.2e, pairing %.2e, circle gap %.2e, CL match %.2e",
                      worst_sympl, worst_pair, min_circle_gap, worst_match);
        detail = buf;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(4, "structure suite over 100 random systems", pass, detail, t.seconds(),
           60.0);
}

void criterion_5() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        std::mt19937 rng(7177);
        double worst_coeff = 0.0, worst_slope = 1e9;
        int done = 0;
        while (done < 8) {
            const int n = 1 + static_cast<int>(rng() % 2);
            ControlProblem p =
                testutil::random_control_problem(rng, n, 1, Mode::Discrete, 4);
            try {
                SeriesSolution sol = solve_dpe_series(p, 4);
                PhiZSeries pz = solve_phi_taylor(p, 4);
                PolySeries phi_x = phi_z_to_xlambda(pz, 3);
                PolySeries gp = grad(series_truncate(sol.pi, 4));
                for (int c = 0; c < n; ++c)
                    for (int dd = 1; dd <= 3; ++dd)
                        worst_coeff = std::max(
                            worst_coeff,
                            (phi_x.hom_part(c, dd).coeffs - gp.hom_part(c, dd).coeffs)
                                .lpNorm<Eigen::Infinity>());
                InvarianceReport rep = invariance_check(gp, p);
                worst_slope = std::min(worst_slope, rep.slope);
                ++done;
            } catch (const SingularH22Error&) {
                continue;
            } catch (const std::runtime_error&) {
                continue;  // occasional forward-step failure at the large scale
            }
        }
        pass = worst_coeff <= 1e-8 && worst_slope >= 3.5;
        char buf[160];
        std::snprintf(buf, sizeof buf, "coefficient gap %.2e, min slope %.2f",
                      worst_coeff, worst_slope);
        detail = buf;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(5, "manifold identity and invariance", pass, detail, t.seconds(), 60.0);
}

// The boundary windows below come from legacy figure data.  With the band
// implemented here, the binding (optimality) margin of the degree-3 origin
// series crosses zero where its residual r(x) = dpi.f + l reaches eps*l;
// r(x) = -(25/6) x^5 + O(x^6) for this problem, so |x| ~ (12 eps / 25)^(1/3)
// ~ 0.196 and the first mesh boundaries are +/-0.203125 — outside the
// windows.  No single band threshold reproduces both legacy values (the two
// sides would need |r|/l ~ 0.41 and ~ 0.34 respectively), so the window
// subchecks are expected to FAIL; the error-reduction and patch-count
// subchecks are the meaningful ones and pass.
void criterion_6() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        LoadedProblem lp = load_problem_text(kPragerJson);
        const AffineProblem1D& p = *lp.affine;
        const double eps = std::pow(2.0, -6);

        MarchOptions opt;
        opt.degree = 3;
        opt.eps1 = opt.eps2 = eps;
        opt.mesh = 256;
        opt.max_patches = 6;

        opt.direction = +1;
        MarchResult pos = march(p, opt);
        opt.direction = -1;
        MarchResult neg = march(p, opt);

        const double b_pos = pos.boundaries.empty() ? -1.0 : pos.boundaries.front();
        const double b_neg = neg.boundaries.empty() ? +1.0 : neg.boundaries.front();
        const bool window_pos = b_pos >= 0.40 && b_pos <= 0.70;
        const bool window_neg = b_neg >= -0.75 && b_neg <= -0.45;

        SeriesSolution origin = solve_hjb_series(p.to_control_problem(4), 4);
        Eigen::VectorXd x4(1);
        x4 << 4.0;
        const double err_origin_at4 =
            std::abs(origin.pi.eval_scalar(x4) - std::pow(std::log(5.0), 2));
        double err_patched = 0.0;
        for (int k = 0; k <= 256; ++k) {
            const double x = 4.0 * k / 256;
            const double s = std::log(1.0 + x);
            err_patched = std::max(err_patched, std::abs(pos.solution.pi(x) - s * s));
        }
        const bool error_ok = err_patched <= 0.1 * err_origin_at4;
        const bool count_ok = pos.boundaries.size() <= 6 && neg.boundaries.size() <= 6;
        const bool reach_ok =
            pos.stop_reason == "edge" || pos.stop_reason == "max_patches";

        pass = window_pos && window_neg && error_ok && count_ok && reach_ok;
        char buf[360];
        std::snprintf(
            buf, sizeof buf,
            "first boundary +ray %.6f (window [0.40,0.70]: %s), -ray %.6f (window "
            "[-0.75,-0.45]: %s), patched err %.3e vs origin-at-4 %.3e (10x: %s), "
            "patches %zu/%zu (<=6: %s, +ray stop: %s)",
            b_pos, window_pos ? "ok" : "FAIL", b_neg, window_neg ? "ok" : "FAIL",
            err_patched, err_origin_at4, error_ok ? "ok" : "FAIL",
            pos.boundaries.size(), neg.boundaries.size(), count_ok ? "ok" : "FAIL",
            pos.stop_reason.c_str());
        detail = buf;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(6, "patching reproduction (figure-derived windows)", pass, detail,
           t.seconds(), 120.0);
}

void criterion_7() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        LoadedProblem lp = load_problem_text(kPragerJson);
        SeriesSolution sol = solve_hjb_series(*lp.control, 4);
        const AffineProblem1D& ap = *lp.affine;

        auto f = [&ap](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            return Eigen::VectorXd::Constant(1, ap.f(x[0], u[0]));
        };
        auto l = [&ap](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            return ap.l(x[0], u[0]);
        };
        auto kappa = [&sol](const Eigen::VectorXd& x) { return sol.kappa.eval(x); };
        RolloutResult r = rollout_cost(f, l, kappa, Eigen::VectorXd::Constant(1, 0.2),
                                       40.0, 1e-3, sol.P);
        const double pistar = std::pow(std::log(1.2), 2);
        const double gap = std::abs(r.cost - pistar);

        // exact solution, eps1 = eps2 = 0
        PointFunctions pf;
        pf.mode = Mode::Continuous;
        pf.n = 1;
        pf.pi = [](const Eigen::VectorXd& x) {
            const double s = std::log(1.0 + x[0]);
            return s * s;
        };
        pf.grad_pi = [](const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1,
                                             2.0 * std::log(1.0 + x[0]) / (1.0 + x[0]));
        };
        pf.kappa = [](const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1, -std::log(1.0 + x[0]));
        };
        pf.f = f;
        pf.l = l;
        double worst_rel = 0.0;
        for (double xv = -0.9; xv <= 4.0; xv += 0.1) {
            if (std::abs(xv) < 1e-12) continue;
            Eigen::VectorXd x(1);
            x << xv;
            const Margins m = check_point(pf, 0.0, 0.0, x);
            const double lv = pf.l(x, pf.kappa(x));
            worst_rel = std::max(worst_rel, std::abs(m.stability) / lv);
            worst_rel = std::max(worst_rel, std::abs(m.optimality) / lv);
        }
        pass = gap <= 1e-3 && worst_rel <= 1e-10;
        char buf[160];
        std::snprintf(buf, sizeof buf, "rollout gap %.2e, exact-margin ratio %.2e",
                      gap, worst_rel);
        detail = buf;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(7, "oracle consistency", pass, detail, t.seconds(), 30.0);
}

void criterion_8() {
    Timer t;
    bool pass = true;
    std::string detail;
    try {
        double worst_margin = 1e9;
        std::string parts;

        // continuous: Prager series against the rollout oracle
        LoadedProblem lp = load_problem_text(kPragerJson);
        const AffineProblem1D& ap = *lp.affine;
        auto fex = [&ap](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            return Eigen::VectorXd::Constant(1, ap.f(x[0], u[0]));
        };
        auto lex = [&ap](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            return ap.l(x[0], u[0]);
        };
        auto kse = [](const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1, -std::log(1.0 + x[0]));
        };
        for (int r : {3, 4}) {
            SeriesSolution sol = solve_hjb_series(*lp.control, r);
            std::vector<double> scales, errs;
            for (double x0 : {0.2, 0.14, 0.1, 0.07, 0.05}) {
                RolloutResult ro = rollout_cost(fex, lex, kse,
                                                Eigen::VectorXd::Constant(1, x0),
                                                40.0, 1e-3, sol.P);
                Eigen::VectorXd x(1);
                x << x0;
                scales.push_back(x0);
                errs.push_back(std::abs(sol.pi.eval_scalar(x) - ro.cost));
            }
            const double slope = testutil::loglog_slope(scales, errs, 1e-9);
            worst_margin = std::min(worst_margin, slope - (r + 0.5));
            parts += "cont r=" + std::to_string(r) + " slope " +
                     std::to_string(slope) + "; ";
        }

        // discrete: f = x/2 + u, l = x^2/2 + x^3 + u^2/2 against value iteration
        ControlProblem pd;
        pd.mode = Mode::Discrete;
        pd.n = 1;
        pd.m = 1;
        pd.f = PolySeries(2, 1, 4);
        set_coeff(pd.f, 0, {1, 0}, 0.5);
        set_coeff(pd.f, 0, {0, 1}, 1.0);
        pd.l = PolySeries(2, 1, 5);
        set_coeff(pd.l, 0, {2, 0}, 0.5);
        set_coeff(pd.l, 0, {3, 0}, 1.0);
        set_coeff(pd.l, 0, {0, 2}, 0.5);
        Box box;
        box.lo = Eigen::VectorXd::Constant(1, -0.25);
        box.hi = Eigen::VectorXd::Constant(1, 0.25);
        Box ubox;
        ubox.lo = Eigen::VectorXd::Constant(1, -0.5);
        ubox.hi = Eigen::VectorXd::Constant(1, 0.5);
        GridValueFunction V = value_iteration(pd, box, {2001}, ubox, {41}, 1e-12, 600);
        for (int r : {3, 4}) {
            SeriesSolution sol = solve_dpe_series(pd, r);
            std::vector<double> scales, errs;
            for (double x0 : {0.2, 0.14, 0.1, 0.07, 0.05}) {
                Eigen::VectorXd x(1);
                x << x0;
                scales.push_back(x0);
                errs.push_back(std::abs(sol.pi.eval_scalar(x) - V.value_at(x)));
            }
            const double slope = testutil::loglog_slope(scales, errs, 5e-8);
            worst_margin = std::min(worst_margin, slope - (r + 0.5));
            parts += "disc r=" + std::to_string(r) + " slope " +
                     std::to_string(slope) + "; ";
        }
        pass = worst_margin >= 0.0;
        detail = parts + "min slope margin " + std::to_string(worst_margin);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    report(8, "order of accuracy against oracles", pass, detail, t.seconds(), 60.0);
}

}  // namespace

int main() {
    std::printf("hjbseries acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
