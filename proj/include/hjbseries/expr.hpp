// Univariate expression trees with exact evaluation and Taylor-mode jets.
// A jet is the coefficient vector c_k = f^(k)(xbar)/k!, propagated through
// arithmetic by convolution recurrences.

#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjb {

struct ExprDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Jet arithmetic on plain coefficient vectors.  All operands share the same
// length; results are truncated to that length.
namespace jets {
using Jet = std::vector<double>;

Jet constant(double v, int len);
Jet variable(double xbar, int len);  // x expanded at xbar: [xbar, 1, 0, ...]
Jet add(const Jet& a, const Jet& b);
Jet sub(const Jet& a, const Jet& b);
Jet scale(const Jet& a, double s);
Jet mul(const Jet& a, const Jet& b);
Jet div(const Jet& a, const Jet& b);      // b[0] != 0
Jet pow_int(const Jet& a, int p);         // negative p via reciprocal
Jet log(const Jet& a);                    // a[0] > 0
Jet exp(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
// jet of the derivative: (k+1) a[k+1], one order shorter conceptually but
// returned at the same length with a trailing zero
Jet derivative(const Jet& a);
double eval(const Jet& a, double dx);     // sum a_k dx^k
}  // namespace jets

class Expr {
  public:
    Expr() = default;

    static Expr constant(double v);
    static Expr var();
    static Expr parse(const std::string& text);

    Expr operator+(const Expr& o) const;
    Expr operator-(const Expr& o) const;
    Expr operator*(const Expr& o) const;
    Expr operator/(const Expr& o) const;
    Expr operator-() const;
    static Expr pow(const Expr& b, int p);
    static Expr ln(const Expr& a);
    static Expr exp(const Expr& a);
    static Expr sin(const Expr& a);
    static Expr cos(const Expr& a);

    bool empty() const { return node_ == nullptr; }

    // Throws ExprDomainError outside the natural domain (never a silent NaN).
    double eval(double x) const;

    // Taylor coefficients f^(k)(xbar)/k!, k = 0..order.
    jets::Jet jet(double xbar, int order) const;

  private:
    struct Node;
    std::shared_ptr<const Node> node_;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
};

}  // namespace hjb
