#include "hjbseries/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hjbseries/linalg.hpp"

namespace hjb {

namespace {

using json = nlohmann::ordered_json;

MultiIndex to_multi(const json& j, int expect_len, const char* what) {
    if (!j.is_array())
        throw ParseError(std::string("problem file: ") + what + " must be an array");
    MultiIndex m;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<int>() < 0)
            throw ParseError(std::string("problem file: ") + what +
                             " entries must be nonnegative integers");
        m.push_back(v.get<int>());
    }
    if (expect_len > 0 && static_cast<int>(m.size()) != expect_len)
        throw ParseError(std::string("problem file: ") + what + " has wrong length");
    return m;
}

ProblemFile::Entry parse_entry(const json& j, int n, int m, bool dynamics) {
    ProblemFile::Entry e;
    if (dynamics) {
        if (!j.contains("component"))
            throw ParseError("problem file: dynamics entry missing 'component'");
        e.component = j.at("component").get<int>();
        if (e.component < 0 || e.component >= n)
            throw ParseError("problem file: dynamics component out of range");
    }
    e.alpha = to_multi(j.at("alpha"), n, "alpha");
    e.beta = to_multi(j.at("beta"), m, "beta");
    e.value = j.at("value").get<double>();
    const int deg = multi_degree(e.alpha) + multi_degree(e.beta);
    if (dynamics && deg < 1)
        throw ParseError("problem file: dynamics entries need total degree >= 1");
    if (!dynamics && deg < 2)
        throw ParseError("problem file: cost entries need total degree >= 2");
    return e;
}

PolySeries entries_to_series(const std::vector<ProblemFile::Entry>& entries, int n,
                             int m, int n_out, int trunc) {
    PolySeries s(n + m, n_out, trunc);
    for (const auto& e : entries) {
        MultiIndex full = e.alpha;
        full.insert(full.end(), e.beta.begin(), e.beta.end());
        HomogeneousPoly h(n + m, multi_degree(full));
        h.coeff(full) = e.value;
        s.add_part(n_out == 1 ? 0 : e.component, h);
    }
    return s;
}

void sort_entries(std::vector<ProblemFile::Entry>& v) {
    std::sort(v.begin(), v.end(),
              [](const ProblemFile::Entry& a, const ProblemFile::Entry& b) {
                  if (a.component != b.component) return a.component < b.component;
                  const int da = multi_degree(a.alpha) + multi_degree(a.beta);
                  const int db = multi_degree(b.alpha) + multi_degree(b.beta);
                  if (da != db) return da < db;
                  if (a.alpha != b.alpha) return a.alpha > b.alpha;  // graded lex
                  return a.beta > b.beta;
              });
}

}  // namespace

ProblemFile parse_problem_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("problem file: JSON parse failure: ") + e.what());
    }
    ProblemFile f;
    try {
        f.name = j.value("name", "problem");
        const std::string mode = j.value("mode", "continuous");
        if (mode == "discrete") f.mode = Mode::Discrete;
        else if (mode == "continuous") f.mode = Mode::Continuous;
        else throw ParseError("problem file: mode must be 'discrete' or 'continuous'");
        f.n = j.value("n", 1);
        f.m = j.value("m", 1);
        if (f.n < 1 || f.m < 1)
            throw ParseError("problem file: n and m must be positive");
        f.f_degree = j.value("f_degree", 3);
        f.l_degree = j.value("l_degree", f.f_degree + 1);
        for (const auto& e : j.value("dynamics", json::array()))
            f.dynamics.push_back(parse_entry(e, f.n, f.m, true));
        for (const auto& e : j.value("cost", json::array()))
            f.cost.push_back(parse_entry(e, f.n, f.m, false));
        if (j.contains("affine1d")) {
            const auto& a = j.at("affine1d");
            f.affine.present = true;
            f.affine.g0 = a.at("g0").get<std::string>();
            f.affine.g1 = a.at("g1").get<std::string>();
            f.affine.l0 = a.at("l0").get<std::string>();
            f.affine.l1 = a.at("l1").get<std::string>();
            f.affine.l2 = a.at("l2").get<std::string>();
            f.affine.dom_lo = a.at("domain").at(0).get<double>();
            f.affine.dom_hi = a.at("domain").at(1).get<double>();
        }
        if (j.contains("exact")) {
            f.exact.present = true;
            f.exact.pi = j.at("exact").value("pi", "");
            f.exact.kappa = j.at("exact").value("kappa", "");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("problem file: missing or mistyped field: ") +
                         e.what());
    }
    return f;
}

std::string save_problem(const ProblemFile& f) {
    json j;
    j["name"] = f.name;
    j["mode"] = f.mode == Mode::Discrete ? "discrete" : "continuous";
    j["n"] = f.n;
    j["m"] = f.m;
    j["f_degree"] = f.f_degree;
    j["l_degree"] = f.l_degree;

    auto dump_entries = [](std::vector<ProblemFile::Entry> v, bool dynamics) {
        sort_entries(v);
        json arr = json::array();
        for (const auto& e : v) {
            json je;
            if (dynamics) je["component"] = e.component;
            je["alpha"] = e.alpha;
            je["beta"] = e.beta;
            je["value"] = e.value;
            arr.push_back(je);
        }
        return arr;
    };
    j["dynamics"] = dump_entries(f.dynamics, true);
    j["cost"] = dump_entries(f.cost, false);
    if (f.affine.present) {
        json a;
        a["g0"] = f.affine.g0;
        a["g1"] = f.affine.g1;
        a["l0"] = f.affine.l0;
        a["l1"] = f.affine.l1;
        a["l2"] = f.affine.l2;
        a["domain"] = {f.affine.dom_lo, f.affine.dom_hi};
        j["affine1d"] = a;
    }
    if (f.exact.present) {
        json e;
        e["pi"] = f.exact.pi;
        e["kappa"] = f.exact.kappa;
        j["exact"] = e;
    }
    return j.dump(2) + "\n";
}

LoadedProblem load_problem_text(const std::string& text) {
    LoadedProblem out;
    out.file = parse_problem_text(text);
    const ProblemFile& f = out.file;

    if (f.affine.present) {
        AffineProblem1D a;
        try {
            a.g0 = Expr::parse(f.affine.g0);
            a.g1 = Expr::parse(f.affine.g1);
            a.l0 = Expr::parse(f.affine.l0);
            a.l1 = Expr::parse(f.affine.l1);
            a.l2 = Expr::parse(f.affine.l2);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("problem file: affine1d expression: ") +
                             e.what());
        }
        a.dom_lo = f.affine.dom_lo;
        a.dom_hi = f.affine.dom_hi;
        a.validate();
        out.affine = a;
    }

    const bool has_series = !f.dynamics.empty() || !f.cost.empty();
    if (has_series) {
        ControlProblem p;
        p.mode = f.mode;
        p.n = f.n;
        p.m = f.m;
        p.f = entries_to_series(f.dynamics, f.n, f.m, f.n, f.f_degree);
        p.l = entries_to_series(f.cost, f.n, f.m, 1, f.l_degree);
        // named structural errors first
        LqrData lqr = p.extract_lqr();
        if (lqr.A.lpNorm<Eigen::Infinity>() == 0.0 &&
            lqr.B.lpNorm<Eigen::Infinity>() == 0.0)
            throw std::invalid_argument("problem file: A,B missing");
        {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lqr.R);
            const double mn = es.eigenvalues().minCoeff();
            if (mn <= 0.0) {
                std::ostringstream os;
                os << "problem file: R not positive definite (eigenvalue " << mn
                   << ")";
                throw std::invalid_argument(os.str());
            }
        }
        p.validate();
        out.control = p;
        {
            std::ostringstream os;
            os << "series section: extracted Q(0,0)=" << lqr.Q(0, 0)
               << " R(0,0)=" << lqr.R(0, 0)
               << " from raw cost coefficients (1/2-convention doubling)";
            out.log.push_back(os.str());
        }
    }

    if (out.affine && f.n == 1 && f.m == 1) {
        const int r = std::max(f.l_degree, f.f_degree + 1);
        ControlProblem derived = out.affine->to_control_problem(r);
        if (out.control) {
            // both sections present: their jets at 0 must agree
            for (int d = 1; d <= r - 1; ++d) {
                const double gap = (out.control->f.hom_part(0, d).coeffs -
                                    derived.f.hom_part(0, d).coeffs)
                                       .lpNorm<Eigen::Infinity>();
                if (gap > 1e-8)
                    throw std::invalid_argument(
                        "problem file: affine1d and series dynamics disagree at 0");
            }
            for (int d = 2; d <= r; ++d) {
                const double gap = (out.control->l.hom_part(0, d).coeffs -
                                    derived.l.hom_part(0, d).coeffs)
                                       .lpNorm<Eigen::Infinity>();
                if (gap > 1e-8)
                    throw std::invalid_argument(
                        "problem file: affine1d and series cost disagree at 0");
            }
        } else {
            derived.validate();
            out.control = derived;
            LqrData lqr = derived.extract_lqr();
            std::ostringstream os;
            os << "affine1d section: series auto-derived to degree " << r
               << " via jets; Q(0,0)=" << lqr.Q(0, 0) << " R(0,0)=" << lqr.R(0, 0);
            out.log.push_back(os.str());
        }
    }

    if (!out.control && !out.affine)
        throw std::invalid_argument("problem file: A,B missing");

    if (f.exact.present) {
        try {
            if (!f.exact.pi.empty()) out.exact_pi = Expr::parse(f.exact.pi);
            if (!f.exact.kappa.empty()) out.exact_kappa = Expr::parse(f.exact.kappa);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("problem file: exact expression: ") + e.what());
        }
    }
    return out;
}

LoadedProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("problem file: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_problem_text(ss.str());
}

}  // namespace hjb
