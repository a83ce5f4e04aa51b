#include "hjbseries/patch.hpp"

#include <cmath>

#include "hjbseries/albrecht.hpp"

namespace hjb {

void AffineProblem1D::validate(int mesh) const {
    if (!(dom_lo < 0.0 && 0.0 <= dom_hi))
        throw std::invalid_argument("AffineProblem1D: domain (lo, hi] must contain 0");
    if (std::abs(g0.eval(0.0)) > 1e-12)
        throw std::invalid_argument("AffineProblem1D: g0(0) != 0");
    const jets::Jet l0j = l0.jet(0.0, 1);
    if (std::abs(l0j[0]) > 1e-12 || std::abs(l0j[1]) > 1e-12)
        throw std::invalid_argument("AffineProblem1D: l0 must vanish to first order at 0");
    for (int k = 1; k <= mesh; ++k) {
        const double x = dom_lo + (dom_hi - dom_lo) * k / mesh;
        if (l2.eval(x) <= 0.0)
            throw std::invalid_argument("AffineProblem1D: l2 not positive on the mesh");
    }
}

ControlProblem AffineProblem1D::to_control_problem(int r) const {
    ControlProblem cp;
    cp.mode = Mode::Continuous;
    cp.n = 1;
    cp.m = 1;
    cp.f = PolySeries(2, 1, r - 1);
    cp.l = PolySeries(2, 1, r);

    const jets::Jet jg0 = g0.jet(0.0, r - 1);
    const jets::Jet jg1 = g1.jet(0.0, r - 2 >= 0 ? r - 2 : 0);
    const jets::Jet jl0 = l0.jet(0.0, r);
    const jets::Jet jl1 = l1.jet(0.0, r - 1);
    const jets::Jet jl2 = l2.jet(0.0, r - 2 >= 0 ? r - 2 : 0);

    auto put = [](PolySeries& s, int xd, int ud, double v) {
        if (v == 0.0) return;
        HomogeneousPoly h(2, xd + ud);
        h.coeff(MultiIndex{xd, ud}) = v;
        s.add_part(0, h);
    };
    for (int k = 1; k <= r - 1; ++k) put(cp.f, k, 0, jg0[k]);
    for (int k = 0; k <= r - 2; ++k) put(cp.f, k, 1, jg1[k]);
    for (int k = 2; k <= r; ++k) put(cp.l, k, 0, jl0[k]);
    for (int k = 1; k <= r - 1; ++k) put(cp.l, k, 1, jl1[k]);
    for (int k = 0; k <= r - 2; ++k) put(cp.l, k, 2, jl2[k]);
    return cp;
}

Patch taylor_at_point(const AffineProblem1D& p, double xbar, double pi0,
                      double pi1, double kappa0, int d) {
    const int L = d + 2;  // jet length carrying pi orders 0..d+1
    const jets::Jet G0 = p.g0.jet(xbar, L - 1);
    const jets::Jet G1 = p.g1.jet(xbar, L - 1);
    const jets::Jet L0 = p.l0.jet(xbar, L - 1);
    const jets::Jet L1 = p.l1.jet(xbar, L - 1);
    const jets::Jet L2 = p.l2.jet(xbar, L - 1);

    const double f0 = G0[0] + G1[0] * kappa0;
    if (std::abs(f0) < 1e-10)
        throw CharacteristicPointError(
            "taylor_at_point: characteristic point, cannot march here");

    const double scale = 1.0 + std::abs(L0[0]) + pi1 * pi1 + kappa0 * kappa0;
    const double e4_gap = pi1 * G1[0] + L1[0] + 2.0 * L2[0] * kappa0;
    if (std::abs(e4_gap) > 1e-8 * scale)
        throw std::invalid_argument(
            "taylor_at_point: Cauchy data violates the gradient equation");

    Patch out;
    out.center = xbar;
    out.pi_jet.assign(L, 0.0);
    out.pi_jet[0] = pi0;
    out.pi_jet[1] = pi1;
    out.kappa_jet.assign(d + 1, 0.0);
    out.kappa_jet[0] = kappa0;
    out.lo = out.hi = xbar;

    auto padded_kappa = [&]() {
        jets::Jet k(L, 0.0);
        for (int i = 0; i <= d; ++i) k[i] = out.kappa_jet[i];
        return k;
    };
    auto hjb3_jet = [&]() {
        const jets::Jet kp = padded_kappa();
        const jets::Jet dpi = jets::derivative(out.pi_jet);
        jets::Jet e = jets::mul(dpi, jets::add(G0, jets::mul(G1, kp)));
        e = jets::add(e, L0);
        e = jets::add(e, jets::mul(L1, kp));
        e = jets::add(e, jets::mul(L2, jets::mul(kp, kp)));
        return e;
    };
    auto hjb4_jet = [&]() {
        const jets::Jet kp = padded_kappa();
        const jets::Jet dpi = jets::derivative(out.pi_jet);
        jets::Jet e = jets::mul(dpi, G1);
        e = jets::add(e, L1);
        e = jets::add(e, jets::scale(jets::mul(L2, kp), 2.0));
        return e;
    };

    for (int k = 1; k <= d; ++k) {
        // the only new unknown in the k-th derivative of the cost equation is
        // pi^(k+1), multiplied by f(xbar, kappa0); the kappa_k placeholder
        // drops out by the gradient-equation consistency of the data
        const jets::Jet e3 = hjb3_jet();
        out.pi_jet[k + 1] = -e3[k] / ((k + 1) * f0);
        const jets::Jet e4 = hjb4_jet();
        out.kappa_jet[k] = -e4[k] / (2.0 * L2[0]);
    }

    // self-consistency: both differentiated equations vanish at the center
    const jets::Jet e3 = hjb3_jet();
    const jets::Jet e4 = hjb4_jet();
    for (int k = 1; k <= d; ++k) {
        if (std::abs(e3[k]) > 1e-10 * scale || std::abs(e4[k]) > 1e-10 * scale)
            throw std::runtime_error("taylor_at_point: jet recursion defect");
    }
    return out;
}

double PatchedSolution::pi(double x) const { return winner(x).pi(x); }

int PatchedSolution::winner_index(double x) const {
    const Patch* w = &winner(x);
    return static_cast<int>(w - patches.data());
}
double PatchedSolution::pi_prime(double x) const { return winner(x).pi_prime(x); }
double PatchedSolution::kappa(double x) const { return winner(x).kappa(x); }

const Patch& PatchedSolution::winner(double x) const {
    if (patches.empty()) throw std::logic_error("PatchedSolution: empty");
    const Patch* best = nullptr;
    double best_pi = 0.0;
    for (const auto& pc : patches) {
        if (!pc.covers(x)) continue;
        const double v = pc.pi(x);
        if (!best || v < best_pi) {
            best = &pc;
            best_pi = v;
        }
    }
    if (best) return *best;
    // outside every interval: fall back to the nearest patch
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& pc : patches) {
        const double dd = std::min(std::abs(x - pc.lo), std::abs(x - pc.hi));
        if (dd < dist) {
            dist = dd;
            best = &pc;
        }
    }
    return *best;
}

PatchedSolution glue(const PatchedSolution& cur, const Patch& next) {
    if (cur.patches.empty()) return PatchedSolution{{next}};
    const Patch& frontier = cur.patches.back();
    if (next.lo > frontier.hi || next.hi < frontier.lo)
        throw std::invalid_argument("glue: disjoint intervals");
    PatchedSolution out = cur;
    out.patches.push_back(next);
    return out;
}

PointFunctions make_point_functions(const PatchedSolution& sol,
                                    const AffineProblem1D& p) {
    PointFunctions pf;
    pf.mode = Mode::Continuous;
    pf.n = 1;
    pf.pi = [sol](const Eigen::VectorXd& x) { return sol.pi(x[0]); };
    pf.grad_pi = [sol](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, sol.pi_prime(x[0]));
    };
    pf.kappa = [sol](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, sol.kappa(x[0]));
    };
    pf.f = [p](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return Eigen::VectorXd::Constant(1, p.f(x[0], u[0]));
    };
    pf.l = [p](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return p.l(x[0], u[0]);
    };
    return pf;
}

MarchResult march(const AffineProblem1D& p, const MarchOptions& opt) {
    p.validate(opt.mesh);
    if (opt.direction != 1 && opt.direction != -1)
        throw std::invalid_argument("march: direction must be +1 or -1");
    const double end = opt.direction > 0 ? p.dom_hi : p.dom_lo;
    if (std::abs(end) <= 0.0)
        throw std::invalid_argument("march: empty ray in the chosen direction");
    const double h = std::abs(end) / opt.mesh;

    // origin patch from the power-series solution
    const int r = opt.degree + 1;
    ControlProblem cp = p.to_control_problem(r);
    SeriesSolution sol0 = solve_hjb_series(cp, r);
    Patch origin;
    origin.center = 0.0;
    origin.pi_jet.assign(opt.degree + 2, 0.0);
    origin.kappa_jet.assign(opt.degree + 1, 0.0);
    for (int k = 2; k <= r; ++k) origin.pi_jet[k] = sol0.pi.hom_part(0, k).coeffs[0];
    for (int k = 1; k <= r - 1; ++k)
        origin.kappa_jet[k] = sol0.kappa.hom_part(0, k).coeffs[0];
    origin.lo = std::min(0.0, end) - 2 * h;
    origin.hi = std::max(0.0, end) + 2 * h;

    MarchResult res;
    res.solution.patches.push_back(origin);

    double cur_pos = 0.0;
    for (int iter = 0; iter < opt.max_patches; ++iter) {
        PointFunctions pf = make_point_functions(res.solution, p);
        // walk the mesh outward from the current frontier
        double xbar = 0.0;
        bool found = false;
        bool domain_edge = false;
        const int k_start = static_cast<int>(std::floor(std::abs(cur_pos) / h)) + 1;
        for (int k = k_start; k <= opt.mesh; ++k) {
            const double x = opt.direction > 0 ? k * h : -k * h;
            try {
                Eigen::VectorXd xv(1);
                xv << x;
                if (!check_point(pf, opt.eps1, opt.eps2, xv).pass()) {
                    xbar = x;
                    found = true;
                    break;
                }
            } catch (const ExprDomainError&) {
                // the problem data is undefined here: the ray is exhausted
                domain_edge = true;
                break;
            }
        }
        if (!found) {
            res.stop_reason = "edge";
            return res;
        }
        (void)domain_edge;

        MarchRecord rec;
        rec.center = xbar;

        double pi0 = res.solution.pi(xbar);
        double pi1 = res.solution.pi_prime(xbar);
        double kappa0 = res.solution.kappa(xbar);

        const double g0v = p.g0.eval(xbar), g1v = p.g1.eval(xbar);
        const double l0v = p.l0.eval(xbar), l1v = p.l1.eval(xbar),
                     l2v = p.l2.eval(xbar);

        // the gradient equation wins over the stored kappa
        const double kappa_pde = -(pi1 * g1v + l1v) / (2.0 * l2v);
        if (std::abs(kappa0 - kappa_pde) > 1e-8) {
            kappa0 = kappa_pde;
            rec.kappa_rederived = true;
        }
        // order-0 cost-equation defect of the incoming data
        auto hjb3_at = [&](double p1, double k0) {
            return p1 * (g0v + g1v * k0) + l0v + l1v * k0 + l2v * k0 * k0;
        };
        rec.hjb3_gap = hjb3_at(pi1, kappa0);
        if (std::abs(rec.hjb3_gap) > 1e-8 * (1.0 + std::abs(l0v))) {
            // re-solve (pi', kappa) from both pointwise equations; with kappa
            // eliminated the cost equation is quadratic in pi'
            const double qa = -g1v * g1v / (4.0 * l2v);
            const double qb = g0v - g1v * l1v / (2.0 * l2v);
            const double qc = l0v - l1v * l1v / (4.0 * l2v);
            double root;
            if (std::abs(qa) < 1e-14) {
                if (std::abs(qb) < 1e-14) {
                    res.stop_reason = "no_real_cauchy_data";
                    return res;
                }
                root = -qc / qb;
            } else {
                const double disc = qb * qb - 4.0 * qa * qc;
                if (disc < 0.0) {
                    res.stop_reason = "no_real_cauchy_data";
                    return res;
                }
                const double r1 = (-qb + std::sqrt(disc)) / (2.0 * qa);
                const double r2 = (-qb - std::sqrt(disc)) / (2.0 * qa);
                root = std::abs(r1 - pi1) <= std::abs(r2 - pi1) ? r1 : r2;
            }
            pi1 = root;
            kappa0 = -(pi1 * g1v + l1v) / (2.0 * l2v);
            rec.pi1_rederived = true;
            rec.kappa_rederived = true;
        }

        Patch next;
        try {
            next = taylor_at_point(p, xbar, pi0, pi1, kappa0, opt.degree);
        } catch (const CharacteristicPointError&) {
            res.stop_reason = "characteristic";
            return res;
        }
        rec.seam_gap_pi = std::abs(res.solution.pi(xbar) - next.pi(xbar));
        rec.seam_gap_kappa = std::abs(res.solution.kappa(xbar) - next.kappa(xbar));

        if (opt.direction > 0) {
            next.lo = xbar - 2 * h;
            next.hi = end + 2 * h;
        } else {
            next.hi = xbar + 2 * h;
            next.lo = end;
        }
        PatchedSolution glued = glue(res.solution, next);
        // trim the previous frontier to the new boundary, keeping the overlap
        Patch& prev = glued.patches[glued.patches.size() - 2];
        if (opt.direction > 0) prev.hi = std::min(prev.hi, xbar);
        else prev.lo = std::max(prev.lo, xbar);

        res.solution = glued;
        res.boundaries.push_back(xbar);
        res.records.push_back(rec);
        cur_pos = xbar;
    }
    // patch budget exhausted; if the final solution already certifies out to
    // the edge, report that instead
    PointFunctions pf = make_point_functions(res.solution, p);
    const int k_start = static_cast<int>(std::floor(std::abs(cur_pos) / h)) + 1;
    bool clean = true;
    for (int k = k_start; k <= opt.mesh && clean; ++k) {
        const double x = opt.direction > 0 ? k * h : -k * h;
        try {
            Eigen::VectorXd xv(1);
            xv << x;
            if (!check_point(pf, opt.eps1, opt.eps2, xv).pass()) clean = false;
        } catch (const ExprDomainError&) {
            break;
        }
    }
    res.stop_reason = clean ? "edge" : "max_patches";
    return res;
}

}  // namespace hjb
