#include "hjbseries/polyalg.hpp"

#include <algorithm>
#include <memory>
#include <mutex>

namespace hjb {

namespace {

// Monomial tables are requested constantly by evaluation and multiplication;
// cache them per (n_vars, degree).
const std::vector<MultiIndex>& monomials_cached(int n_vars, int degree) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<std::vector<MultiIndex>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n_vars, degree);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<std::vector<MultiIndex>>(
                                    enumerate_monomials(n_vars, degree)))
                 .first;
    }
    return *it->second;
}

}  // namespace

long long monomial_count(int n_vars, int degree) {
    if (n_vars < 1) throw std::invalid_argument("monomial_count: n_vars < 1");
    if (degree < 0) throw std::invalid_argument("monomial_count: degree < 0");
    // C(n_vars + degree - 1, degree)
    long long c = 1;
    for (int i = 1; i <= degree; ++i) {
        c = c * (n_vars - 1 + i) / i;
    }
    return c;
}

std::vector<MultiIndex> enumerate_monomials(int n_vars, int degree) {
    if (n_vars < 1) throw std::invalid_argument("enumerate_monomials: n_vars < 1");
    if (degree < 0) throw std::invalid_argument("enumerate_monomials: degree < 0");
    std::vector<MultiIndex> out;
    out.reserve(static_cast<size_t>(monomial_count(n_vars, degree)));
    MultiIndex cur(n_vars, 0);
    // Lex-descending recursion over exponent vectors of fixed total degree.
    auto rec = [&](auto&& self, int pos, int rem) -> void {
        if (pos == n_vars - 1) {
            cur[pos] = rem;
            out.push_back(cur);
            return;
        }
        for (int e = rem; e >= 0; --e) {
            cur[pos] = e;
            self(self, pos + 1, rem - e);
        }
    };
    rec(rec, 0, degree);
    return out;
}

int monomial_rank(const MultiIndex& a) {
    const int n = static_cast<int>(a.size());
    int rank = 0;
    int rem = multi_degree(a);
    for (int i = 0; i < n - 1; ++i) {
        // monomials whose i-th exponent exceeds a[i] come first
        for (int e = rem; e > a[i]; --e) {
            rank += static_cast<int>(monomial_count(n - 1 - i, rem - e));
        }
        rem -= a[i];
    }
    return rank;
}

double HomogeneousPoly::eval(const Eigen::VectorXd& x) const {
    if (x.size() != n_vars)
        throw std::invalid_argument("HomogeneousPoly::eval: dimension mismatch");
    const auto& monos = monomials_cached(n_vars, degree);
    double acc = 0.0;
    for (size_t k = 0; k < monos.size(); ++k) {
        const double c = coeffs[static_cast<Eigen::Index>(k)];
        if (c == 0.0) continue;
        double term = c;
        for (int i = 0; i < n_vars; ++i) {
            for (int e = 0; e < monos[k][i]; ++e) term *= x[i];
        }
        acc += term;
    }
    return acc;
}

HomogeneousPoly hom_add(const HomogeneousPoly& a, const HomogeneousPoly& b) {
    if (a.n_vars != b.n_vars || a.degree != b.degree)
        throw std::invalid_argument("hom_add: shape mismatch");
    HomogeneousPoly r = a;
    r.coeffs += b.coeffs;
    return r;
}

HomogeneousPoly hom_scale(const HomogeneousPoly& a, double s) {
    HomogeneousPoly r = a;
    r.coeffs *= s;
    return r;
}

HomogeneousPoly hom_mul(const HomogeneousPoly& a, const HomogeneousPoly& b) {
    if (a.n_vars != b.n_vars)
        throw std::invalid_argument("hom_mul: variable count mismatch");
    HomogeneousPoly r(a.n_vars, a.degree + b.degree);
    const auto& ma = monomials_cached(a.n_vars, a.degree);
    const auto& mb = monomials_cached(b.n_vars, b.degree);
    for (size_t i = 0; i < ma.size(); ++i) {
        const double ca = a.coeffs[static_cast<Eigen::Index>(i)];
        if (ca == 0.0) continue;
        for (size_t j = 0; j < mb.size(); ++j) {
            const double cb = b.coeffs[static_cast<Eigen::Index>(j)];
            if (cb == 0.0) continue;
            MultiIndex m(a.n_vars);
            for (int v = 0; v < a.n_vars; ++v) m[v] = ma[i][v] + mb[j][v];
            r.coeffs[monomial_rank(m)] += ca * cb;
        }
    }
    return r;
}

void PolySeries::add_part(int comp, const HomogeneousPoly& h) {
    if (h.n_vars != n_vars)
        throw std::invalid_argument("PolySeries::add_part: variable count mismatch");
    if (h.degree > trunc) return;
    auto it = comps[comp].find(h.degree);
    if (it == comps[comp].end()) {
        comps[comp].emplace(h.degree, h);
    } else {
        it->second.coeffs += h.coeffs;
    }
}

HomogeneousPoly PolySeries::hom_part(int comp, int d) const {
    auto it = comps[comp].find(d);
    if (it != comps[comp].end()) return it->second;
    return HomogeneousPoly(n_vars, d);
}

Eigen::VectorXd PolySeries::eval(const Eigen::VectorXd& x) const {
    if (x.size() != n_vars)
        throw std::invalid_argument("PolySeries::eval: dimension mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_out());
    for (int c = 0; c < n_out(); ++c)
        for (const auto& [d, h] : comps[c]) y[c] += h.eval(x);
    return y;
}

double PolySeries::eval_scalar(const Eigen::VectorXd& x) const {
    if (n_out() != 1)
        throw std::invalid_argument("PolySeries::eval_scalar: not scalar-valued");
    return eval(x)[0];
}

double PolySeries::coeff_norm() const {
    double m = 0.0;
    for (const auto& comp : comps)
        for (const auto& [d, h] : comp)
            if (h.coeffs.size() > 0)
                m = std::max(m, h.coeffs.lpNorm<Eigen::Infinity>());
    return m;
}

double PolySeries::coeff_norm(int d) const {
    double m = 0.0;
    for (const auto& comp : comps) {
        auto it = comp.find(d);
        if (it != comp.end() && it->second.coeffs.size() > 0)
            m = std::max(m, it->second.coeffs.lpNorm<Eigen::Infinity>());
    }
    return m;
}

int PolySeries::min_degree() const {
    int m = trunc + 1;
    for (const auto& comp : comps)
        for (const auto& [d, h] : comp)
            if (!h.is_zero()) m = std::min(m, d);
    return m;
}

PolySeries series_add(const PolySeries& a, const PolySeries& b) {
    if (a.n_vars != b.n_vars || a.n_out() != b.n_out())
        throw std::invalid_argument("series_add: shape mismatch");
    PolySeries r = a;
    r.trunc = std::min(a.trunc, b.trunc);
    for (int c = 0; c < b.n_out(); ++c)
        for (const auto& [d, h] : b.comps[c]) r.add_part(c, h);
    // drop parts beyond the common truncation
    for (auto& comp : r.comps) {
        for (auto it = comp.begin(); it != comp.end();) {
            if (it->first > r.trunc) it = comp.erase(it);
            else ++it;
        }
    }
    return r;
}

PolySeries series_scale(const PolySeries& a, double s) {
    PolySeries r = a;
    for (auto& comp : r.comps)
        for (auto& [d, h] : comp) h.coeffs *= s;
    return r;
}

PolySeries series_mul(const PolySeries& a, const PolySeries& b, int trunc) {
    if (a.n_vars != b.n_vars)
        throw std::invalid_argument("series_mul: variable count mismatch");
    if (a.n_out() != 1 || b.n_out() != 1)
        throw std::invalid_argument("series_mul: scalar series expected");
    PolySeries r(a.n_vars, 1, trunc);
    for (const auto& [da, ha] : a.comps[0]) {
        for (const auto& [db, hb] : b.comps[0]) {
            if (da + db > trunc) continue;
            r.add_part(0, hom_mul(ha, hb));
        }
    }
    return r;
}

PolySeries series_truncate(const PolySeries& a, int trunc) {
    PolySeries r(a.n_vars, a.n_out(), trunc);
    for (int c = 0; c < a.n_out(); ++c)
        for (const auto& [d, h] : a.comps[c])
            if (d <= trunc) r.comps[c].emplace(d, h);
    return r;
}

PolySeries series_component(const PolySeries& a, int comp) {
    PolySeries r(a.n_vars, 1, a.trunc);
    r.comps[0] = a.comps[comp];
    return r;
}

PolySeries series_stack(const PolySeries& a, const PolySeries& b) {
    if (a.n_vars != b.n_vars)
        throw std::invalid_argument("series_stack: variable count mismatch");
    PolySeries r(a.n_vars, a.n_out() + b.n_out(), std::min(a.trunc, b.trunc));
    for (int c = 0; c < a.n_out(); ++c) r.comps[c] = a.comps[c];
    for (int c = 0; c < b.n_out(); ++c) r.comps[a.n_out() + c] = b.comps[c];
    return r;
}

PolySeries series_partial(const PolySeries& a, int var) {
    if (var < 0 || var >= a.n_vars)
        throw std::invalid_argument("series_partial: bad variable index");
    PolySeries r(a.n_vars, a.n_out(), a.trunc);
    for (int c = 0; c < a.n_out(); ++c) {
        for (const auto& [d, h] : a.comps[c]) {
            if (d == 0) continue;
            HomogeneousPoly g(a.n_vars, d - 1);
            const auto& monos = monomials_cached(a.n_vars, d);
            for (size_t k = 0; k < monos.size(); ++k) {
                const double cf = h.coeffs[static_cast<Eigen::Index>(k)];
                if (cf == 0.0 || monos[k][var] == 0) continue;
                MultiIndex m = monos[k];
                m[var] -= 1;
                g.coeffs[monomial_rank(m)] += cf * monos[k][var];
            }
            r.add_part(c, g);
        }
    }
    return r;
}

PolySeries grad(const PolySeries& s) {
    if (s.n_out() != 1) throw std::invalid_argument("grad: scalar series expected");
    PolySeries r(s.n_vars, s.n_vars, s.trunc);
    for (int v = 0; v < s.n_vars; ++v) {
        PolySeries p = series_partial(s, v);
        r.comps[v] = p.comps[0];
    }
    return r;
}

PolySeries identity_series(int n_vars, int trunc) {
    return linear_series(Eigen::MatrixXd::Identity(n_vars, n_vars), trunc);
}

PolySeries linear_series(const Eigen::MatrixXd& M, int trunc) {
    const int n = static_cast<int>(M.cols());
    const int m = static_cast<int>(M.rows());
    PolySeries r(n, m, trunc);
    for (int i = 0; i < m; ++i) {
        HomogeneousPoly h(n, 1);
        for (int j = 0; j < n; ++j) {
            MultiIndex e(n, 0);
            e[j] = 1;
            h.coeffs[monomial_rank(e)] = M(i, j);
        }
        r.add_part(i, h);
    }
    return r;
}

PolySeries quadratic_form_series(const Eigen::MatrixXd& P, int trunc) {
    const int n = static_cast<int>(P.rows());
    PolySeries r(n, 1, trunc);
    HomogeneousPoly h(n, 2);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            MultiIndex m(n, 0);
            m[i] += 1;
            m[j] += 1;
            h.coeffs[monomial_rank(m)] += 0.5 * P(i, j);
        }
    }
    r.add_part(0, h);
    return r;
}

PolySeries zero_series(int n_vars, int n_out, int trunc) {
    return PolySeries(n_vars, n_out, trunc);
}

PolySeries compose(const PolySeries& outer, const PolySeries& inner, int trunc) {
    if (inner.n_out() != outer.n_vars)
        throw std::invalid_argument("compose: inner output dim != outer variable count");
    if (inner.min_degree() < 1) {
        for (int c = 0; c < inner.n_out(); ++c) {
            auto it = inner.comps[c].find(0);
            if (it != inner.comps[c].end() && !it->second.is_zero())
                throw std::invalid_argument("compose: inner has a constant term");
        }
    }
    const int nv = inner.n_vars;
    const int k = outer.n_vars;

    // powers[j][e] = (inner_j)^e truncated, built on demand
    std::vector<std::vector<PolySeries>> powers(k);
    auto power = [&](int j, int e) -> const PolySeries& {
        auto& pj = powers[j];
        if (pj.empty()) {
            PolySeries one(nv, 1, trunc);
            HomogeneousPoly c0(nv, 0);
            c0.coeffs[0] = 1.0;
            one.add_part(0, c0);
            pj.push_back(one);
            pj.push_back(series_truncate(series_component(inner, j), trunc));
        }
        while (static_cast<int>(pj.size()) <= e)
            pj.push_back(series_mul(pj.back(), pj[1], trunc));
        return pj[e];
    };

    PolySeries r(nv, outer.n_out(), trunc);
    for (int c = 0; c < outer.n_out(); ++c) {
        for (const auto& [d, h] : outer.comps[c]) {
            if (d > trunc) continue;  // inner has no constant part, so the
                                      // image of a degree-d term starts at d
            const auto& monos = monomials_cached(k, d);
            for (size_t idx = 0; idx < monos.size(); ++idx) {
                const double cf = h.coeffs[static_cast<Eigen::Index>(idx)];
                if (cf == 0.0) continue;
                PolySeries term(nv, 1, trunc);
                HomogeneousPoly c0(nv, 0);
                c0.coeffs[0] = cf;
                term.add_part(0, c0);
                for (int j = 0; j < k; ++j) {
                    if (monos[idx][j] == 0) continue;
                    term = series_mul(term, power(j, monos[idx][j]), trunc);
                }
                for (const auto& [dd, hh] : term.comps[0]) r.add_part(c, hh);
            }
        }
    }
    return r;
}

PolySeries embed_vars(const PolySeries& a, int new_n_vars,
                      const std::vector<int>& var_map) {
    if (static_cast<int>(var_map.size()) != a.n_vars)
        throw std::invalid_argument("embed_vars: map size mismatch");
    PolySeries r(new_n_vars, a.n_out(), a.trunc);
    for (int c = 0; c < a.n_out(); ++c) {
        for (const auto& [d, h] : a.comps[c]) {
            HomogeneousPoly g(new_n_vars, d);
            const auto& monos = monomials_cached(a.n_vars, d);
            for (size_t k = 0; k < monos.size(); ++k) {
                const double cf = h.coeffs[static_cast<Eigen::Index>(k)];
                if (cf == 0.0) continue;
                MultiIndex m(new_n_vars, 0);
                for (int v = 0; v < a.n_vars; ++v) m[var_map[v]] += monos[k][v];
                g.coeffs[monomial_rank(m)] += cf;
            }
            r.add_part(c, g);
        }
    }
    return r;
}

PolySeries project_vars(const PolySeries& a, const std::vector<int>& keep) {
    const int nk = static_cast<int>(keep.size());
    if (nk < 1) throw std::invalid_argument("project_vars: empty keep set");
    PolySeries r(nk, a.n_out(), a.trunc);
    for (int c = 0; c < a.n_out(); ++c) {
        for (const auto& [d, h] : a.comps[c]) {
            HomogeneousPoly g(nk, d);
            bool any = false;
            const auto& monos = monomials_cached(a.n_vars, d);
            for (size_t k = 0; k < monos.size(); ++k) {
                const double cf = h.coeffs[static_cast<Eigen::Index>(k)];
                if (cf == 0.0) continue;
                MultiIndex m(nk, 0);
                int kept_deg = 0;
                for (int v = 0; v < nk; ++v) {
                    m[v] = monos[k][keep[v]];
                    kept_deg += m[v];
                }
                if (kept_deg != d) continue;  // a dropped variable appears
                g.coeffs[monomial_rank(m)] += cf;
                any = true;
            }
            if (any) r.add_part(c, g);
        }
    }
    return r;
}

PolySeries implicit_series(const PolySeries& F, int n_v, int n_w, int trunc) {
    if (F.n_vars != n_v + n_w)
        throw std::invalid_argument("implicit_series: F variable count mismatch");
    if (F.n_out() != n_w)
        throw std::invalid_argument("implicit_series: F output count mismatch");

    // dF/dw at 0
    Eigen::MatrixXd J0(n_w, n_w);
    for (int i = 0; i < n_w; ++i) {
        const HomogeneousPoly lin = F.hom_part(i, 1);
        for (int j = 0; j < n_w; ++j) {
            MultiIndex e(n_v + n_w, 0);
            e[n_v + j] = 1;
            J0(i, j) = lin.coeffs[monomial_rank(e)];
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J0);
    if (std::abs(lu.determinant()) < 1e-14)
        throw std::runtime_error("implicit_series: dF/dw singular at 0");

    PolySeries w(n_v, n_w, trunc);
    PolySeries id_v = identity_series(n_v, trunc);
    for (int d = 1; d <= trunc; ++d) {
        PolySeries arg = series_stack(id_v, w);
        PolySeries g = compose(F, arg, d);
        // degree-d defect, solved monomial by monomial
        const long long nm = monomial_count(n_v, d);
        Eigen::MatrixXd S(n_w, nm);
        for (int i = 0; i < n_w; ++i) S.row(i) = g.hom_part(i, d).coeffs.transpose();
        if (S.lpNorm<Eigen::Infinity>() == 0.0) continue;
        Eigen::MatrixXd C = -lu.solve(S);
        for (int i = 0; i < n_w; ++i) {
            HomogeneousPoly h(n_v, d);
            h.coeffs = C.row(i).transpose();
            w.add_part(i, h);
        }
    }
    return w;
}

PolySeries invert_series(const PolySeries& X, int trunc) {
    const int n = X.n_vars;
    if (X.n_out() != n)
        throw std::invalid_argument("invert_series: series must be square");
    // Solve F(v, w) = X(w) - v = 0 for w(v).
    PolySeries F(2 * n, n, trunc);
    std::vector<int> wmap(n);
    for (int i = 0; i < n; ++i) wmap[i] = n + i;
    PolySeries Xw = embed_vars(X, 2 * n, wmap);
    F = Xw;
    for (int i = 0; i < n; ++i) {
        HomogeneousPoly h(2 * n, 1);
        MultiIndex e(2 * n, 0);
        e[i] = 1;
        h.coeffs[monomial_rank(e)] = -1.0;
        F.add_part(i, h);
    }
    return implicit_series(F, n, n, trunc);
}

}  // namespace hjb
