#include "hjbseries/lyapunov.hpp"

#include <algorithm>
#include <cmath>

namespace hjb {

PointFunctions make_point_functions(const SeriesSolution& sol,
                                    const ControlProblem& p) {
    PointFunctions pf;
    pf.mode = p.mode;
    pf.n = p.n;
    auto pi = sol.pi;
    auto gp = grad(sol.pi);
    auto ka = sol.kappa;
    auto f = p.f;
    auto l = p.l;
    const int n = p.n, m = p.m;
    pf.pi = [pi](const Eigen::VectorXd& x) { return pi.eval_scalar(x); };
    pf.grad_pi = [gp](const Eigen::VectorXd& x) { return gp.eval(x); };
    pf.kappa = [ka](const Eigen::VectorXd& x) { return ka.eval(x); };
    pf.f = [f, n, m](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        Eigen::VectorXd xu(n + m);
        xu << x, u;
        return f.eval(xu);
    };
    pf.l = [l, n, m](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        Eigen::VectorXd xu(n + m);
        xu << x, u;
        return l.eval_scalar(xu);
    };
    return pf;
}

Margins check_point(const PointFunctions& pf, double eps1, double eps2,
                    const Eigen::VectorXd& x) {
    const Eigen::VectorXd u = pf.kappa(x);
    const double lv = pf.l(x, u);
    double decay;
    if (pf.mode == Mode::Discrete) {
        decay = pf.pi(pf.f(x, u)) - pf.pi(x);
    } else {
        decay = pf.grad_pi(x).dot(pf.f(x, u));
    }
    Margins m;
    m.stability = -decay - (1.0 - eps1) * lv;
    m.optimality = (1.0 + eps2) * lv + decay;
    return m;
}

namespace {

// Deterministic Halton sequence in the box (bases 2,3,5,7).
Eigen::VectorXd halton_point(int index, const Box& box) {
    static const int primes[4] = {2, 3, 5, 7};
    const int n = static_cast<int>(box.lo.size());
    Eigen::VectorXd x(n);
    for (int d = 0; d < n; ++d) {
        double f = 1.0, r = 0.0;
        int i = index + 1;
        while (i > 0) {
            f /= primes[d];
            r += f * (i % primes[d]);
            i /= primes[d];
        }
        x[d] = box.lo[d] + r * (box.hi[d] - box.lo[d]);
    }
    return x;
}

struct Sample {
    Eigen::VectorXd x;
    double pi;
    Margins margins;
    bool on_box_boundary;
};

}  // namespace

LyapunovReport largest_sublevel(const PointFunctions& pf, double eps1, double eps2,
                                const Box& box, int mesh) {
    const int n = static_cast<int>(box.lo.size());
    if (n > 4)
        throw std::invalid_argument("largest_sublevel: dimension above 4 unsupported");
    if (n <= 2 && mesh < 64)
        throw std::invalid_argument("largest_sublevel: mesh >= 64 per axis required");
    for (int d = 0; d < n; ++d)
        if (!(box.lo[d] <= 0.0 && 0.0 <= box.hi[d]))
            throw std::invalid_argument("largest_sublevel: box must contain 0");

    // sample set: exhaustive grid (n <= 2) or Halton points (n <= 4)
    std::vector<Eigen::VectorXd> pts;
    std::vector<bool> on_boundary;
    if (n == 1) {
        for (int k = 0; k <= mesh; ++k) {
            const double t = static_cast<double>(k) / mesh;
            Eigen::VectorXd x(1);
            x << box.lo[0] + t * (box.hi[0] - box.lo[0]);
            pts.push_back(x);
            on_boundary.push_back(k == 0 || k == mesh);
        }
    } else if (n == 2) {
        for (int i = 0; i <= mesh; ++i) {
            for (int j = 0; j <= mesh; ++j) {
                Eigen::VectorXd x(2);
                x << box.lo[0] + (box.hi[0] - box.lo[0]) * i / mesh,
                    box.lo[1] + (box.hi[1] - box.lo[1]) * j / mesh;
                pts.push_back(x);
                on_boundary.push_back(i == 0 || i == mesh || j == 0 || j == mesh);
            }
        }
    } else {
        const int count = mesh * mesh;
        for (int k = 0; k < count; ++k) {
            pts.push_back(halton_point(k, box));
            on_boundary.push_back(false);
        }
        // add the box corners as explicit cap witnesses
        for (int corner = 0; corner < (1 << n); ++corner) {
            Eigen::VectorXd x(n);
            for (int d = 0; d < n; ++d)
                x[d] = (corner >> d) & 1 ? box.hi[d] : box.lo[d];
            pts.push_back(x);
            on_boundary.push_back(true);
        }
    }

    const double c_min = 1e-8;
    std::vector<Sample> samples;
    samples.reserve(pts.size());
    double cap_level = std::numeric_limits<double>::infinity();
    double pi_max = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        Sample s;
        s.x = pts[i];
        s.pi = pf.pi(pts[i]);
        s.margins = check_point(pf, eps1, eps2, pts[i]);
        s.on_box_boundary = on_boundary[i];
        // the equilibrium may legitimately sit on a ray box's edge; a boundary
        // sample caps the level only when it carries actual cost
        if (s.on_box_boundary && s.pi > c_min) cap_level = std::min(cap_level, s.pi);
        pi_max = std::max(pi_max, s.pi);
        samples.push_back(std::move(s));
    }

    auto all_pass_below = [&](double c) {
        for (const auto& s : samples)
            if (s.pi <= c && !s.margins.pass()) return false;
        return true;
    };

    LyapunovReport rep;
    rep.eps1 = eps1;
    rep.eps2 = eps2;
    rep.mesh = mesh;

    if (!all_pass_below(c_min))
        throw std::runtime_error("largest_sublevel: series invalid near origin");

    double c_hi = std::isfinite(cap_level) ? cap_level : pi_max;
    if (all_pass_below(c_hi)) {
        rep.c = c_hi;
        rep.capped = true;
        rep.valid = true;
    } else {
        double lo = c_min, hi = c_hi;
        while (hi - lo > 1e-3 * std::max(hi, 1e-12)) {
            const double mid = 0.5 * (lo + hi);
            if (all_pass_below(mid)) lo = mid;
            else hi = mid;
        }
        rep.c = lo;
        rep.valid = true;
    }

    // a certificate that contains no sample beyond the origin certifies nothing
    bool has_interior = false;
    for (const auto& s : samples)
        if (s.pi > c_min && s.pi <= rep.c) has_interior = true;
    if (!has_interior)
        throw std::runtime_error("largest_sublevel: series invalid near origin");

    // worst margins and the tight boundary points over the passing sublevel
    double worst_stab = std::numeric_limits<double>::infinity();
    double worst_opt = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        if (s.pi > rep.c) continue;
        worst_stab = std::min(worst_stab, s.margins.stability);
        worst_opt = std::min(worst_opt, s.margins.optimality);
    }
    rep.worst_margin_stability = worst_stab;
    rep.worst_margin_optimality = worst_opt;

    std::vector<const Sample*> passing, failing;
    for (const auto& s : samples) {
        if (s.pi <= rep.c) passing.push_back(&s);
        else if (!s.margins.pass()) failing.push_back(&s);
    }
    std::sort(passing.begin(), passing.end(), [](const Sample* a, const Sample* b) {
        return a->margins.stability < b->margins.stability;
    });
    for (size_t i = 0; i < passing.size() && i < 4; ++i)
        rep.boundary_points.push_back(passing[i]->x);
    std::sort(failing.begin(), failing.end(),
              [](const Sample* a, const Sample* b) { return a->pi < b->pi; });
    for (size_t i = 0; i < failing.size() && i < 4; ++i)
        rep.frontier_points.push_back(failing[i]->x);

    return rep;
}

}  // namespace hjb
