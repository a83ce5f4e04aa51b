#include "hjbseries/oracle.hpp"

#include <cmath>

namespace hjb {

namespace {

int grid_size(const std::vector<int>& mesh) {
    int total = 1;
    for (int m : mesh) total *= m;
    return total;
}

Eigen::VectorXd node_coords(const Box& box, const std::vector<int>& mesh, int flat) {
    const int n = static_cast<int>(mesh.size());
    Eigen::VectorXd x(n);
    for (int d = n - 1; d >= 0; --d) {
        const int i = flat % mesh[d];
        flat /= mesh[d];
        x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * i / (mesh[d] - 1);
    }
    return x;
}

}  // namespace

double GridValueFunction::value_at(const Eigen::VectorXd& x) const {
    const int n = static_cast<int>(mesh.size());
    // per-axis cell index and weight, with clamping
    std::vector<int> i0(n);
    std::vector<double> w(n);
    for (int d = 0; d < n; ++d) {
        const double t =
            (x[d] - box.lo[d]) / (box.hi[d] - box.lo[d]) * (mesh[d] - 1);
        const double tc = std::clamp(t, 0.0, static_cast<double>(mesh[d] - 1));
        i0[d] = std::min(static_cast<int>(tc), mesh[d] - 2);
        w[d] = tc - i0[d];
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << n); ++corner) {
        double weight = 1.0;
        int flat = 0;
        for (int d = 0; d < n; ++d) {
            const int bit = (corner >> d) & 1;
            weight *= bit ? w[d] : (1.0 - w[d]);
            flat = flat * mesh[d] + i0[d] + bit;
        }
        acc += weight * values[flat];
    }
    return acc;
}

GridValueFunction value_iteration(const ControlProblem& p, const Box& box,
                                  const std::vector<int>& mesh, const Box& u_box,
                                  const std::vector<int>& u_mesh, double tol,
                                  int max_sweeps) {
    if (p.mode != Mode::Discrete)
        throw std::invalid_argument("value_iteration: discrete problem expected");
    const int n = p.n, m = p.m;
    if (static_cast<int>(mesh.size()) != n || static_cast<int>(u_mesh.size()) != m)
        throw std::invalid_argument("value_iteration: mesh shape mismatch");
    if (n > 2) throw std::invalid_argument("value_iteration: n <= 2 supported");

    GridValueFunction V;
    V.box = box;
    V.mesh = mesh;
    const int total = grid_size(mesh);
    V.values = Eigen::VectorXd::Zero(total);

    const int u_total = grid_size(u_mesh);

    auto inside = [&](const Eigen::VectorXd& x) {
        for (int d = 0; d < n; ++d)
            if (x[d] < box.lo[d] || x[d] > box.hi[d]) return false;
        return true;
    };
    auto clamp_to_box = [&](Eigen::VectorXd x) {
        for (int d = 0; d < n; ++d) x[d] = std::clamp(x[d], box.lo[d], box.hi[d]);
        return x;
    };

    Eigen::VectorXd xu(n + m);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double vmax = V.values.size() ? V.values.cwiseAbs().maxCoeff() : 0.0;
        Eigen::VectorXd next(total);
        auto q_value = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            Eigen::VectorXd xu_local(n + m);
            xu_local << x, u;
            const Eigen::VectorXd succ = p.f.eval(xu_local);
            double q = p.l.eval_scalar(xu_local);
            if (inside(succ)) {
                q += V.value_at(succ);
            } else {
                q += V.value_at(clamp_to_box(succ)) + 10.0 * vmax;
            }
            return q;
        };
        for (int node = 0; node < total; ++node) {
            const Eigen::VectorXd x = node_coords(box, mesh, node);
            double best = std::numeric_limits<double>::infinity();
            Eigen::VectorXd best_u(m);
            for (int uk = 0; uk < u_total; ++uk) {
                const Eigen::VectorXd u = node_coords(u_box, u_mesh, uk);
                const double q = q_value(x, u);
                if (q < best) {
                    best = q;
                    best_u = u;
                }
            }
            // one golden-section refinement per control axis
            for (int d = 0; d < m; ++d) {
                const double step =
                    (u_box.hi[d] - u_box.lo[d]) / (u_mesh[d] - 1);
                double lo = std::max(u_box.lo[d], best_u[d] - step);
                double hi = std::min(u_box.hi[d], best_u[d] + step);
                const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
                double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
                Eigen::VectorXd ua = best_u, ub = best_u;
                for (int it = 0; it < 60; ++it) {
                    ua[d] = a;
                    ub[d] = b;
                    if (q_value(x, ua) < q_value(x, ub)) hi = b;
                    else lo = a;
                    a = hi - gr * (hi - lo);
                    b = lo + gr * (hi - lo);
                }
                best_u[d] = 0.5 * (lo + hi);
                best = std::min(best, q_value(x, best_u));
            }
            next[node] = best;
        }
        const double change = (next - V.values).lpNorm<Eigen::Infinity>();
        V.values = next;
        V.sweeps = sweep + 1;
        V.achieved_tol = change;
        if (change <= tol) return V;
    }
    throw std::runtime_error("value_iteration: no convergence within max_sweeps");
}

RolloutResult rollout_cost(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& l,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& kappa,
    const Eigen::VectorXd& x0, double horizon, double dt,
    const Eigen::MatrixXd& P_tail) {
    if (dt <= 0.0 || horizon <= 0.0)
        throw std::invalid_argument("rollout_cost: positive horizon and dt required");
    const double escape = 10.0 * (1.0 + x0.norm());

    auto rhs = [&](const Eigen::VectorXd& x) {
        const Eigen::VectorXd u = kappa(x);
        Eigen::VectorXd d(x.size() + 1);
        d.head(x.size()) = f(x, u);
        d[x.size()] = l(x, u);
        return d;
    };

    Eigen::VectorXd z(x0.size() + 1);
    z.head(x0.size()) = x0;
    z[x0.size()] = 0.0;

    RolloutResult out;
    const int steps = static_cast<int>(std::ceil(horizon / dt));
    for (int k = 0; k < steps; ++k) {
        const Eigen::VectorXd x = z.head(x0.size());
        if (x.norm() > escape)
            throw std::runtime_error("rollout_cost: trajectory escape");
        if (x.norm() < 1e-6) {
            out.tail = 0.5 * x.dot(P_tail * x);
            out.tail_reached = true;
            break;
        }
        const Eigen::VectorXd k1 = rhs(z.head(x0.size()));
        auto shift = [&](double a, const Eigen::VectorXd& kv) {
            return (z + a * dt * kv).head(x0.size()).eval();
        };
        const Eigen::VectorXd k2 = rhs(shift(0.5, k1));
        const Eigen::VectorXd k3 = rhs(shift(0.5, k2));
        const Eigen::VectorXd k4 = rhs(shift(1.0, k3));
        Eigen::VectorXd dz(z.size());
        dz.head(x0.size()) = (dt / 6.0) * (k1.head(x0.size()) + 2 * k2.head(x0.size()) +
                                           2 * k3.head(x0.size()) + k4.head(x0.size()));
        dz[x0.size()] = (dt / 6.0) * (k1[x0.size()] + 2 * k2[x0.size()] +
                                      2 * k3[x0.size()] + k4[x0.size()]);
        z += dz;
    }
    if (!out.tail_reached) {
        const Eigen::VectorXd xf = z.head(x0.size());
        out.tail = 0.5 * xf.dot(P_tail * xf);
    }
    out.final_norm = z.head(x0.size()).norm();
    out.cost = z[x0.size()] + out.tail;
    return out;
}

}  // namespace hjb
