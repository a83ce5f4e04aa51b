#include "hjbseries/expr.hpp"

#include <cctype>
#include <cmath>

namespace hjb {

namespace jets {

Jet constant(double v, int len) {
    Jet j(len, 0.0);
    j[0] = v;
    return j;
}

Jet variable(double xbar, int len) {
    Jet j(len, 0.0);
    j[0] = xbar;
    if (len > 1) j[1] = 1.0;
    return j;
}

Jet add(const Jet& a, const Jet& b) {
    Jet r(a);
    for (size_t k = 0; k < r.size(); ++k) r[k] += b[k];
    return r;
}

Jet sub(const Jet& a, const Jet& b) {
    Jet r(a);
    for (size_t k = 0; k < r.size(); ++k) r[k] -= b[k];
    return r;
}

Jet scale(const Jet& a, double s) {
    Jet r(a);
    for (double& v : r) v *= s;
    return r;
}

Jet mul(const Jet& a, const Jet& b) {
    Jet r(a.size(), 0.0);
    for (size_t k = 0; k < r.size(); ++k)
        for (size_t j = 0; j <= k; ++j) r[k] += a[j] * b[k - j];
    return r;
}

Jet div(const Jet& a, const Jet& b) {
    if (std::abs(b[0]) < 1e-300)
        throw ExprDomainError("jet division by zero leading coefficient");
    Jet h(a.size(), 0.0);
    for (size_t k = 0; k < a.size(); ++k) {
        double acc = a[k];
        for (size_t j = 0; j < k; ++j) acc -= h[j] * b[k - j];
        h[k] = acc / b[0];
    }
    return h;
}

Jet pow_int(const Jet& a, int p) {
    if (p < 0) return div(constant(1.0, static_cast<int>(a.size())), pow_int(a, -p));
    Jet r = constant(1.0, static_cast<int>(a.size()));
    for (int i = 0; i < p; ++i) r = mul(r, a);
    return r;
}

Jet log(const Jet& a) {
    if (a[0] <= 0.0) throw ExprDomainError("log of a non-positive value");
    Jet g(a.size(), 0.0);
    g[0] = std::log(a[0]);
    for (size_t k = 1; k < a.size(); ++k) {
        double acc = a[k];
        for (size_t i = 1; i < k; ++i)
            acc -= (static_cast<double>(i) / k) * g[i] * a[k - i];
        g[k] = acc / a[0];
    }
    return g;
}

Jet exp(const Jet& a) {
    Jet g(a.size(), 0.0);
    g[0] = std::exp(a[0]);
    for (size_t k = 1; k < a.size(); ++k) {
        double acc = 0.0;
        for (size_t i = 1; i <= k; ++i) acc += i * a[i] * g[k - i];
        g[k] = acc / static_cast<double>(k);
    }
    return g;
}

namespace {
void sincos_jets(const Jet& a, Jet* s, Jet* c) {
    s->assign(a.size(), 0.0);
    c->assign(a.size(), 0.0);
    (*s)[0] = std::sin(a[0]);
    (*c)[0] = std::cos(a[0]);
    for (size_t k = 1; k < a.size(); ++k) {
        double sa = 0.0, ca = 0.0;
        for (size_t i = 1; i <= k; ++i) {
            sa += i * a[i] * (*c)[k - i];
            ca += i * a[i] * (*s)[k - i];
        }
        (*s)[k] = sa / static_cast<double>(k);
        (*c)[k] = -ca / static_cast<double>(k);
    }
}
}  // namespace

Jet sin(const Jet& a) {
    Jet s, c;
    sincos_jets(a, &s, &c);
    return s;
}

Jet cos(const Jet& a) {
    Jet s, c;
    sincos_jets(a, &s, &c);
    return c;
}

Jet derivative(const Jet& a) {
    Jet r(a.size(), 0.0);
    for (size_t k = 0; k + 1 < a.size(); ++k) r[k] = (k + 1) * a[k + 1];
    return r;
}

double eval(const Jet& a, double dx) {
    double acc = 0.0;
    for (size_t k = a.size(); k-- > 0;) acc = a[k] + dx * acc;
    return acc;
}

}  // namespace jets

struct Expr::Node {
    enum Kind { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow, kLn, kExp, kSin, kCos };
    Kind kind;
    double value = 0.0;  // kConst
    int power = 0;       // kPow
    std::shared_ptr<const Node> a, b;

    static std::shared_ptr<Node> make(Kind k) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        return n;
    }
};

Expr Expr::constant(double v) {
    auto n = Node::make(Node::kConst);
    n->value = v;
    return Expr(n);
}

Expr Expr::var() { return Expr(Node::make(Node::kVar)); }

Expr Expr::operator+(const Expr& o) const {
    auto n = Node::make(Node::kAdd);
    n->a = node_;
    n->b = o.node_;
    return Expr(n);
}
Expr Expr::operator-(const Expr& o) const {
    auto n = Node::make(Node::kSub);
    n->a = node_;
    n->b = o.node_;
    return Expr(n);
}
Expr Expr::operator*(const Expr& o) const {
    auto n = Node::make(Node::kMul);
    n->a = node_;
    n->b = o.node_;
    return Expr(n);
}
Expr Expr::operator/(const Expr& o) const {
    auto n = Node::make(Node::kDiv);
    n->a = node_;
    n->b = o.node_;
    return Expr(n);
}
Expr Expr::operator-() const {
    auto n = Node::make(Node::kNeg);
    n->a = node_;
    return Expr(n);
}
Expr Expr::pow(const Expr& b, int p) {
    auto n = Node::make(Node::kPow);
    n->a = b.node_;
    n->power = p;
    return Expr(n);
}
Expr Expr::ln(const Expr& a) {
    auto n = Node::make(Node::kLn);
    n->a = a.node_;
    return Expr(n);
}
Expr Expr::exp(const Expr& a) {
    auto n = Node::make(Node::kExp);
    n->a = a.node_;
    return Expr(n);
}
Expr Expr::sin(const Expr& a) {
    auto n = Node::make(Node::kSin);
    n->a = a.node_;
    return Expr(n);
}
Expr Expr::cos(const Expr& a) {
    auto n = Node::make(Node::kCos);
    n->a = a.node_;
    return Expr(n);
}

double Expr::eval(double x) const {
    if (!node_) throw std::invalid_argument("Expr: empty expression");
    const Node& n = *node_;
    switch (n.kind) {
        case Node::kConst: return n.value;
        case Node::kVar: return x;
        case Node::kAdd: return Expr(n.a).eval(x) + Expr(n.b).eval(x);
        case Node::kSub: return Expr(n.a).eval(x) - Expr(n.b).eval(x);
        case Node::kMul: return Expr(n.a).eval(x) * Expr(n.b).eval(x);
        case Node::kDiv: {
            const double den = Expr(n.b).eval(x);
            if (std::abs(den) < 1e-300) throw ExprDomainError("division by zero");
            return Expr(n.a).eval(x) / den;
        }
        case Node::kNeg: return -Expr(n.a).eval(x);
        case Node::kPow: {
            const double base = Expr(n.a).eval(x);
            if (n.power < 0 && std::abs(base) < 1e-300)
                throw ExprDomainError("negative power of zero");
            return std::pow(base, n.power);
        }
        case Node::kLn: {
            const double arg = Expr(n.a).eval(x);
            if (arg <= 0.0) throw ExprDomainError("ln of a non-positive value");
            return std::log(arg);
        }
        case Node::kExp: return std::exp(Expr(n.a).eval(x));
        case Node::kSin: return std::sin(Expr(n.a).eval(x));
        case Node::kCos: return std::cos(Expr(n.a).eval(x));
    }
    throw std::logic_error("Expr: bad node kind");
}

jets::Jet Expr::jet(double xbar, int order) const {
    if (!node_) throw std::invalid_argument("Expr: empty expression");
    const int len = order + 1;
    const Node& n = *node_;
    switch (n.kind) {
        case Node::kConst: return jets::constant(n.value, len);
        case Node::kVar: return jets::variable(xbar, len);
        case Node::kAdd:
            return jets::add(Expr(n.a).jet(xbar, order), Expr(n.b).jet(xbar, order));
        case Node::kSub:
            return jets::sub(Expr(n.a).jet(xbar, order), Expr(n.b).jet(xbar, order));
        case Node::kMul:
            return jets::mul(Expr(n.a).jet(xbar, order), Expr(n.b).jet(xbar, order));
        case Node::kDiv:
            return jets::div(Expr(n.a).jet(xbar, order), Expr(n.b).jet(xbar, order));
        case Node::kNeg: return jets::scale(Expr(n.a).jet(xbar, order), -1.0);
        case Node::kPow: return jets::pow_int(Expr(n.a).jet(xbar, order), n.power);
        case Node::kLn: return jets::log(Expr(n.a).jet(xbar, order));
        case Node::kExp: return jets::exp(Expr(n.a).jet(xbar, order));
        case Node::kSin: return jets::sin(Expr(n.a).jet(xbar, order));
        case Node::kCos: return jets::cos(Expr(n.a).jet(xbar, order));
    }
    throw std::logic_error("Expr: bad node kind");
}

namespace {

// recursive-descent parser over: expr := term (+|- term)*; term := unary
// ((*|/) unary)*; unary := '-' unary | postfix; postfix := primary ('^' int)*;
// primary := number | 'x' | fn '(' expr ')' | '(' expr ')'
struct Parser {
    const std::string& s;
    size_t pos = 0;

    explicit Parser(const std::string& src) : s(src) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("Expr::parse: " + what + " at position " +
                                    std::to_string(pos) + " in \"" + s + "\"");
    }

    Expr expr() {
        Expr e = term();
        while (true) {
            skip();
            if (eat('+')) e = e + term();
            else if (eat('-')) e = e - term();
            else return e;
        }
    }
    Expr term() {
        Expr e = unary();
        while (true) {
            skip();
            if (eat('*')) e = e * unary();
            else if (eat('/')) e = e / unary();
            else return e;
        }
    }
    Expr unary() {
        skip();
        if (eat('-')) return -unary();
        return postfix();
    }
    Expr postfix() {
        Expr e = primary();
        while (true) {
            skip();
            if (!eat('^')) return e;
            skip();
            const bool neg = eat('-');
            const size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
                ++pos;
            if (pos == start) fail("integer exponent expected");
            const int p = std::stoi(s.substr(start, pos - start));
            e = Expr::pow(e, neg ? -p : p);
        }
    }
    Expr primary() {
        skip();
        if (pos >= s.size()) fail("unexpected end of input");
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t consumed = 0;
            const double v = std::stod(s.substr(pos), &consumed);
            pos += consumed;
            return Expr::constant(v);
        }
        if (c == '(') {
            ++pos;
            Expr e = expr();
            if (!eat(')')) fail("')' expected");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const size_t start = pos;
            while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos])))
                ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "x") return Expr::var();
            if (!eat('(')) fail("'(' expected after function name");
            Expr arg = expr();
            if (!eat(')')) fail("')' expected");
            if (name == "ln" || name == "log") return Expr::ln(arg);
            if (name == "exp") return Expr::exp(arg);
            if (name == "sin") return Expr::sin(arg);
            if (name == "cos") return Expr::cos(arg);
            fail("unknown function '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Expr Expr::parse(const std::string& text) {
    Parser p(text);
    Expr e = p.expr();
    p.skip();
    if (p.pos != text.size())
        throw std::invalid_argument("Expr::parse: trailing input at position " +
                                    std::to_string(p.pos) + " in \"" + text + "\"");
    return e;
}

}  // namespace hjb
