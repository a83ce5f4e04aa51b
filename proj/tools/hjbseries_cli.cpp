// Command-line driver: problem ingestion, solver dispatch, run logging and
// CSV emission.
//
// Exit codes: 0 success, 2 parse error, 3 invariant violation,
// 4 solver precondition failure, 5 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hjbseries/albrecht.hpp"
#include "hjbseries/hamiltonian.hpp"
#include "hjbseries/lyapunov.hpp"
#include "hjbseries/oracle.hpp"
#include "hjbseries/patch.hpp"
#include "hjbseries/problem_io.hpp"

namespace {

using namespace hjb;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunLog {
    std::ofstream file;
    bool quiet = false;  // HJB_LOG=quiet silences stdout echoing
    void open(const std::string& path) {
        file.open(path);
        const char* lv = std::getenv("HJB_LOG");
        quiet = lv && std::string(lv) == "quiet";
    }
    void note(const std::string& line) {
        if (!quiet) std::cout << "[log] " << line << "\n";
        if (file) file << line << "\n";
    }
};

SeriesSolution solve_series(const LoadedProblem& lp, int degree, RunLog& log) {
    if (!lp.control)
        throw std::invalid_argument("this command needs a series-form problem");
    const ControlProblem& p = *lp.control;
    log.note("mode=" + std::string(p.mode == Mode::Discrete ? "discrete" : "continuous") +
             " n=" + std::to_string(p.n) + " m=" + std::to_string(p.m) +
             " degree=" + std::to_string(degree));
    if (lp.file.f_degree < degree - 1)
        log.note("dynamics terms above degree " + std::to_string(lp.file.f_degree) +
                 " default to zero");
    if (lp.file.l_degree < degree)
        log.note("cost terms above degree " + std::to_string(lp.file.l_degree) +
                 " default to zero");
    return p.mode == Mode::Discrete ? solve_dpe_series(p, degree)
                                    : solve_hjb_series(p, degree);
}

void write_series_outputs(const LoadedProblem& lp, const SeriesSolution& sol,
                          const std::string& out_dir, RunLog& log) {
    const std::string base = out_dir + "/" + lp.file.name;
    {
        std::ofstream csv(base + "_series_coeffs.csv");
        csv << "quantity,component,degree,exponents,value\n";
        for (int d = 2; d <= sol.trunc; ++d) {
            const HomogeneousPoly h = sol.pi.hom_part(0, d);
            const auto monos = enumerate_monomials(h.n_vars, d);
            for (size_t k = 0; k < monos.size(); ++k) {
                if (h.coeffs[static_cast<Eigen::Index>(k)] == 0.0) continue;
                csv << "pi,0," << d << ",\"";
                for (size_t i = 0; i < monos[k].size(); ++i)
                    csv << (i ? " " : "") << monos[k][i];
                csv << "\"," << fmt(h.coeffs[static_cast<Eigen::Index>(k)]) << "\n";
            }
        }
        for (int c = 0; c < sol.kappa.n_out(); ++c) {
            for (int d = 1; d <= sol.trunc - 1; ++d) {
                const HomogeneousPoly h = sol.kappa.hom_part(c, d);
                const auto monos = enumerate_monomials(h.n_vars, d);
                for (size_t k = 0; k < monos.size(); ++k) {
                    if (h.coeffs[static_cast<Eigen::Index>(k)] == 0.0) continue;
                    csv << "kappa," << c << "," << d << ",\"";
                    for (size_t i = 0; i < monos[k].size(); ++i)
                        csv << (i ? " " : "") << monos[k][i];
                    csv << "\"," << fmt(h.coeffs[static_cast<Eigen::Index>(k)]) << "\n";
                }
            }
        }
    }
    log.note("wrote " + base + "_series_coeffs.csv");

    if (lp.control->n == 1) {
        std::ofstream csv(base + "_series_samples.csv");
        csv << "x,pi,kappa\n";
        const double lo = lp.affine ? lp.affine->dom_lo : -1.0;
        const double hi = lp.affine ? lp.affine->dom_hi : 1.0;
        for (int k = 1; k <= 256; ++k) {
            const double x = lo + (hi - lo) * k / 256;
            Eigen::VectorXd xv(1);
            xv << x;
            csv << fmt(x) << ',' << fmt(sol.pi.eval_scalar(xv)) << ','
                << fmt(sol.kappa.eval(xv)[0]) << "\n";
        }
        log.note("wrote " + base + "_series_samples.csv");
    }
}

int cmd_series(const LoadedProblem& lp, int degree, const std::string& out_dir,
               RunLog& log) {
    SeriesSolution sol = solve_series(lp, degree, log);
    std::cout << "P =\n" << sol.P << "\nK =\n" << sol.K << "\n";
    std::cout << "pi coefficients by degree:\n";
    for (int d = 2; d <= sol.trunc; ++d) {
        std::cout << "  [" << d << "]";
        const auto h = sol.pi.hom_part(0, d);
        for (Eigen::Index k = 0; k < h.coeffs.size(); ++k)
            std::cout << ' ' << fmt(h.coeffs[k]);
        std::cout << "\n";
    }
    std::cout << "kappa coefficients by degree:\n";
    for (int c = 0; c < sol.kappa.n_out(); ++c) {
        for (int d = 1; d <= sol.trunc - 1; ++d) {
            std::cout << "  comp " << c << " [" << d << "]";
            const auto h = sol.kappa.hom_part(c, d);
            for (Eigen::Index k = 0; k < h.coeffs.size(); ++k)
                std::cout << ' ' << fmt(h.coeffs[k]);
            std::cout << "\n";
        }
    }
    write_series_outputs(lp, sol, out_dir, log);
    return 0;
}

int cmd_pencil(const LoadedProblem& lp, RunLog& log) {
    if (!lp.control)
        throw std::invalid_argument("pencil needs a series-form problem");
    const LqrData lqr = lp.control->extract_lqr();
    const HamiltonianBlocks blocks = HamiltonianBlocks::from_lqr(lqr);
    const SymplecticPencil pencil = SymplecticPencil::from_blocks(blocks);
    const PencilEigenvalues pe = pencil_eigenvalues(pencil);

    std::cout << "finite eigenvalues (" << pe.finite.size() << "), infinite: "
              << pe.n_infinite << "\n";
    bool hyperbolic = true;
    for (const auto& mu : pe.finite) {
        std::string partner = "-";
        if (std::abs(mu) > 1e-8) {
            for (const auto& nu : pe.finite)
                if (std::abs(mu * nu - 1.0) <= 1e-6) partner = fmt(std::abs(nu));
        } else {
            partner = "infinite";
        }
        if (std::abs(std::abs(mu) - 1.0) <= 1e-6) hyperbolic = false;
        std::cout << "  mu = " << mu.real() << (mu.imag() >= 0 ? "+" : "")
                  << mu.imag() << "i  |mu| = " << fmt(std::abs(mu))
                  << "  reciprocal partner |.|: " << partner << "\n";
    }
    std::cout << "hyperbolic (no eigenvalue within 1e-6 of the unit circle): "
              << (hyperbolic ? "yes" : "NO") << "\n";
    try {
        const Eigen::MatrixXd F = forward_matrix(blocks);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(blocks.H22);
        const double cond = svd.singularValues()(0) /
                            svd.singularValues()(svd.singularValues().size() - 1);
        std::cout << "H22 condition number: " << fmt(cond) << "\n";
        log.note("symplectic residual |F'JF - J| = " + fmt(check_symplectic(F)));
        std::cout << "forward matrix symplectic residual: "
                  << fmt(check_symplectic(F)) << "\n";
    } catch (const SingularH22Error&) {
        std::cout << "H22 singular: bidirectional-only system (pencil path only)\n";
    }
    return 0;
}

int cmd_lyap(const LoadedProblem& lp, int degree, double eps1, double eps2,
             std::vector<double> box_flat, int mesh, const std::string& out_dir,
             RunLog& log) {
    SeriesSolution sol = solve_series(lp, degree, log);
    const int n = lp.control->n;
    Box box;
    if (box_flat.empty()) {
        box.lo = Eigen::VectorXd::Constant(n, -1.0);
        box.hi = Eigen::VectorXd::Constant(n, 1.0);
    } else if (static_cast<int>(box_flat.size()) == 2) {
        box.lo = Eigen::VectorXd::Constant(n, box_flat[0]);
        box.hi = Eigen::VectorXd::Constant(n, box_flat[1]);
    } else if (static_cast<int>(box_flat.size()) == 2 * n) {
        box.lo.resize(n);
        box.hi.resize(n);
        for (int d = 0; d < n; ++d) {
            box.lo[d] = box_flat[2 * d];
            box.hi[d] = box_flat[2 * d + 1];
        }
    } else {
        throw std::invalid_argument("--box needs 2 or 2n values");
    }
    log.note("lyap eps1=" + fmt(eps1) + " eps2=" + fmt(eps2) +
             " mesh=" + std::to_string(mesh));

    PointFunctions pf;
    if (lp.affine) {
        // evaluate the series against the exact dynamics and cost
        auto pi = sol.pi;
        auto gp = grad(sol.pi);
        auto ka = sol.kappa;
        const AffineProblem1D ap = *lp.affine;
        pf.mode = Mode::Continuous;
        pf.n = 1;
        pf.pi = [pi](const Eigen::VectorXd& x) { return pi.eval_scalar(x); };
        pf.grad_pi = [gp](const Eigen::VectorXd& x) { return gp.eval(x); };
        pf.kappa = [ka](const Eigen::VectorXd& x) { return ka.eval(x); };
        pf.f = [ap](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            return Eigen::VectorXd::Constant(1, ap.f(x[0], u[0]));
        };
        pf.l = [ap](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            return ap.l(x[0], u[0]);
        };
    } else {
        pf = make_point_functions(sol, *lp.control);
    }
    const LyapunovReport rep = largest_sublevel(pf, eps1, eps2, box, mesh);
    std::cout << "largest passing level c = " << fmt(rep.c)
              << (rep.capped ? "  (capped by the box)" : "") << "\n";
    std::cout << "worst margins on {pi<=c}: stability " << fmt(rep.worst_margin_stability)
              << ", optimality " << fmt(rep.worst_margin_optimality) << "\n";
    for (const auto& b : rep.boundary_points)
        std::cout << "  tight point: " << b.transpose() << "\n";
    for (const auto& fpt : rep.frontier_points)
        std::cout << "  frontier point: " << fpt.transpose() << "\n";

    const std::string path = out_dir + "/" + lp.file.name + "_lyap.csv";
    std::ofstream csv(path);
    csv << "kind,c,eps1,eps2,mesh,capped,worst_stability,worst_optimality\n";
    csv << "report," << fmt(rep.c) << ',' << fmt(eps1) << ',' << fmt(eps2) << ','
        << mesh << ',' << (rep.capped ? 1 : 0) << ','
        << fmt(rep.worst_margin_stability) << ',' << fmt(rep.worst_margin_optimality)
        << "\n";
    auto dump_points = [&](const char* kind, const std::vector<Eigen::VectorXd>& pts) {
        for (const auto& pt : pts) {
            csv << kind;
            for (Eigen::Index i = 0; i < pt.size(); ++i) csv << ',' << fmt(pt[i]);
            csv << "\n";
        }
    };
    dump_points("boundary_point", rep.boundary_points);
    dump_points("frontier_point", rep.frontier_points);
    log.note("wrote " + path);
    return 0;
}

int cmd_patch1d(const LoadedProblem& lp, int degree, double eps1, double eps2,
                int mesh, const std::string& direction, int max_patches,
                const std::string& out_dir, RunLog& log) {
    if (!lp.affine)
        throw std::invalid_argument("patch1d needs an affine1d problem section");
    const AffineProblem1D& p = *lp.affine;

    std::vector<int> dirs;
    if (direction == "both") dirs = {+1, -1};
    else if (direction == "+1" || direction == "1") dirs = {+1};
    else if (direction == "-1") dirs = {-1};
    else throw std::invalid_argument("--direction must be +1, -1 or both");

    std::vector<std::optional<MarchResult>> results(2);
    for (int dir : dirs) {
        MarchOptions opt;
        opt.degree = degree;
        opt.eps1 = eps1;
        opt.eps2 = eps2;
        opt.mesh = mesh;
        opt.direction = dir;
        opt.max_patches = max_patches;
        MarchResult res = march(p, opt);
        std::cout << "direction " << (dir > 0 ? "+1" : "-1") << ": "
                  << res.boundaries.size() << " new patches, stop: "
                  << res.stop_reason << "\n";
        for (size_t i = 0; i < res.boundaries.size(); ++i) {
            std::cout << "  boundary " << i + 1 << ": " << fmt(res.boundaries[i]);
            if (res.records[i].kappa_rederived) std::cout << "  [kappa re-derived]";
            if (res.records[i].pi1_rederived) std::cout << "  [pi' re-derived]";
            std::cout << "\n";
            log.note("seam gaps at " + fmt(res.boundaries[i]) + ": pi " +
                     fmt(res.records[i].seam_gap_pi) + ", kappa " +
                     fmt(res.records[i].seam_gap_kappa));
        }
        results[dir > 0 ? 0 : 1] = std::move(res);
    }

    const std::string path = out_dir + "/" + lp.file.name + "_patch.csv";
    std::ofstream csv(path);
    const bool have_exact = lp.exact_pi.has_value();
    csv << "x,pi,kappa" << (have_exact ? ",pi_exact" : "") << ",residual,patch_id\n";
    const int total_mesh = mesh;
    for (int k = 0; k <= total_mesh; ++k) {
        const double x = p.dom_lo + (p.dom_hi - p.dom_lo) * k / total_mesh;
        const MarchResult* use = nullptr;
        if (x >= 0.0 && results[0]) use = &*results[0];
        if (x < 0.0 && results[1]) use = &*results[1];
        if (!use) continue;
        double pi_v, ka_v, res_v;
        try {
            pi_v = use->solution.pi(x);
            ka_v = use->solution.kappa(x);
            res_v = use->solution.pi_prime(x) * p.f(x, ka_v) + p.l(x, ka_v);
        } catch (const ExprDomainError&) {
            continue;  // outside the problem data's domain (open endpoint)
        }
        csv << fmt(x) << ',' << fmt(pi_v) << ',' << fmt(ka_v);
        if (have_exact) {
            try {
                csv << ',' << fmt(lp.exact_pi->eval(x));
            } catch (const ExprDomainError&) {
                csv << ",nan";
            }
        }
        csv << ',' << fmt(res_v) << ',' << use->solution.winner_index(x) << "\n";
    }
    log.note("wrote " + path);
    return 0;
}

int cmd_oracle_compare(const LoadedProblem& lp, int degree,
                       std::vector<double> box_flat, int mesh,
                       const std::string& out_dir, RunLog& log) {
    SeriesSolution sol = solve_series(lp, degree, log);
    const ControlProblem& p = *lp.control;
    if (p.n != 1)
        throw std::invalid_argument("oracle-compare supports scalar problems");
    double lo = -0.2, hi = 0.2;
    if (box_flat.size() == 2) {
        lo = box_flat[0];
        hi = box_flat[1];
    }
    double max_gap = 0.0, sum_gap = 0.0;
    int count = 0;

    if (p.mode == Mode::Discrete) {
        Box box;
        box.lo = Eigen::VectorXd::Constant(1, lo);
        box.hi = Eigen::VectorXd::Constant(1, hi);
        Box ubox;
        ubox.lo = Eigen::VectorXd::Constant(1, 2 * lo);
        ubox.hi = Eigen::VectorXd::Constant(1, 2 * hi);
        auto V = value_iteration(p, box, {std::max(mesh, 64) + 1}, ubox, {41},
                                 1e-10, 500);
        log.note("value iteration: " + std::to_string(V.sweeps) + " sweeps, change " +
                 fmt(V.achieved_tol));
        {
            const std::string gpath = out_dir + "/" + lp.file.name + "_grid.csv";
            std::ofstream gcsv(gpath);
            gcsv << "x,value\n";
            const int nodes = V.mesh[0];
            for (int k = 0; k < nodes; ++k) {
                const double x = V.box.lo[0] +
                                 (V.box.hi[0] - V.box.lo[0]) * k / (nodes - 1);
                gcsv << fmt(x) << ',' << fmt(V.values[k]) << "\n";
            }
            log.note("wrote " + gpath);
        }
        for (int k = 0; k <= mesh; ++k) {
            Eigen::VectorXd x(1);
            x << lo + (hi - lo) * k / mesh;
            const double gap = std::abs(sol.pi.eval_scalar(x) - V.value_at(x));
            max_gap = std::max(max_gap, gap);
            sum_gap += gap;
            ++count;
        }
    } else {
        auto f = [&p](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            Eigen::VectorXd xu(2);
            xu << x, u;
            return p.f.eval(xu);
        };
        auto l = [&p](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            Eigen::VectorXd xu(2);
            xu << x, u;
            return p.l.eval_scalar(xu);
        };
        auto kappa = [&sol](const Eigen::VectorXd& x) { return sol.kappa.eval(x); };
        for (int k = 0; k <= 16; ++k) {
            Eigen::VectorXd x0(1);
            x0 << lo + (hi - lo) * k / 16;
            if (std::abs(x0[0]) < 1e-9) continue;
            const auto r = rollout_cost(f, l, kappa, x0, 40.0, 1e-3, sol.P);
            const double gap = std::abs(sol.pi.eval_scalar(x0) - r.cost);
            max_gap = std::max(max_gap, gap);
            sum_gap += gap;
            ++count;
        }
    }
    std::cout << "oracle-compare: max gap " << fmt(max_gap) << ", mean gap "
              << fmt(sum_gap / std::max(count, 1)) << " over " << count
              << " points\n";
    const std::string path = out_dir + "/" + lp.file.name + "_oracle.csv";
    std::ofstream csv(path);
    csv << "max_gap,mean_gap,points\n"
        << fmt(max_gap) << ',' << fmt(sum_gap / std::max(count, 1)) << ',' << count
        << "\n";
    log.note("wrote " + path);
    return 0;
}

bool is_precondition_message(const std::string& msg) {
    return msg.find("not stabilizable") != std::string::npos ||
           msg.find("not detectable") != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hjbseries: local polynomial solutions of infinite-horizon "
                 "optimal control problems"};
    app.require_subcommand(1);

    std::string problem_path;
    std::string out_dir = ".";
    app.add_option("problem", problem_path, "problem file (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");

    int degree = -1;  // resolved per command: series/lyap/oracle 4, patch1d 3
    double eps = 0.015625, eps1 = -1.0, eps2 = -1.0;
    int mesh = 256;
    std::vector<double> box_flat;
    std::string direction = "both";
    int max_patches = 6;

    auto add_common = [&](CLI::App* c, bool with_patch_flags) {
        c->add_option("--degree", degree, "series truncation degree");
        c->add_option("--eps", eps, "tolerance for both bands (default 2^-6)");
        c->add_option("--eps1", eps1, "stability band tolerance (overrides --eps)");
        c->add_option("--eps2", eps2, "optimality band tolerance (overrides --eps)");
        c->add_option("--mesh", mesh, "samples per axis / ray");
        c->add_option("--box", box_flat, "box bounds: lo hi (or per-dimension)");
        if (with_patch_flags) {
            c->add_option("--direction", direction, "+1, -1 or both");
            c->add_option("--max-patches", max_patches, "patch budget per direction");
        }
    };

    CLI::App* c_series = app.add_subcommand("series", "power series around 0");
    c_series->add_option("--degree", degree, "pi truncation degree");
    CLI::App* c_patch = app.add_subcommand("patch1d", "Taylor patching across the domain");
    add_common(c_patch, true);
    CLI::App* c_lyap = app.add_subcommand("lyap", "Lyapunov sublevel validation");
    add_common(c_lyap, false);
    CLI::App* c_pencil = app.add_subcommand("pencil", "symplectic pencil eigenstructure");
    CLI::App* c_oracle = app.add_subcommand("oracle-compare", "series vs grid/rollout oracle");
    add_common(c_oracle, false);

    CLI11_PARSE(app, argc, argv);

    if (eps1 < 0) eps1 = eps;
    if (eps2 < 0) eps2 = eps;
    const int series_degree = degree < 0 ? 4 : degree;
    const int patch_degree = degree < 0 ? 3 : degree;

    try {
        std::filesystem::create_directories(out_dir);
        LoadedProblem lp = load_problem(problem_path);
        RunLog log;
        log.open(out_dir + "/" + lp.file.name + "_run.log");
        for (const auto& line : lp.log) log.note(line);
        log.note("eps1=" + fmt(eps1) + " eps2=" + fmt(eps2));

        if (c_series->parsed()) return cmd_series(lp, series_degree, out_dir, log);
        if (c_patch->parsed())
            return cmd_patch1d(lp, patch_degree, eps1, eps2, mesh, direction,
                               max_patches, out_dir, log);
        if (c_lyap->parsed())
            return cmd_lyap(lp, series_degree, eps1, eps2, box_flat, mesh, out_dir,
                            log);
        if (c_pencil->parsed()) return cmd_pencil(lp, log);
        if (c_oracle->parsed())
            return cmd_oracle_compare(lp, series_degree, box_flat, mesh, out_dir,
                                      log);
        return 0;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ExprDomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 5;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return is_precondition_message(e.what()) ? 4 : 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 5;
    }
}
