#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holoflow/expr.hpp"

namespace holoflow {

// Dense polynomial, coefficients from the constant term upward.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> coeffs);
    static Polynomial constant(Complex c) { return Polynomial({c}); }
    static Polynomial monomial(Complex c, int degree);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.size() == 1 && c_[0] == Complex(0.0, 0.0); }
    const std::vector<Complex>& coeffs() const { return c_; }
    Complex operator[](int k) const { return k <= degree() ? c_[k] : Complex{}; }
    Complex leading() const { return c_.back(); }

    Complex eval(Complex z) const;
    Polynomial derivative() const;
    Polynomial reversed(int as_degree) const;  // z^n p(1/z)
    // Sum of |c_k||z|^k, the natural scale for residual tests.
    double magnitude_at(Complex z) const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(Complex s) const;
    Polynomial operator-() const { return *this * Complex(-1.0, 0.0); }
    Polynomial pow(int n) const;
    // Synthetic division by (z - r); the remainder is discarded.
    Polynomial deflate(Complex r) const;

    Expr to_expr() const;

private:
    void trim();
    std::vector<Complex> c_{Complex{}};
};

struct Root {
    Complex value;
    int multiplicity = 1;
    double residual = 0.0;  // |p(r)| / sum |c_k||r|^k
    bool converged = true;
};

// All roots with multiplicity: Laguerre iteration with deflation, Newton
// polish against the undeflated polynomial, then clustering of repeated roots.
std::vector<Root> polynomial_roots(const Polynomial& p);

struct Rational {
    Polynomial num, den;

    Complex eval(Complex z) const { return num.eval(z) / den.eval(z); }
    // Remove common roots and make the denominator monic.
    Rational normalized() const;
    Expr to_expr() const;
};

// Numerator/denominator form of a tree without transcendental nodes.
std::optional<Rational> to_rational(const Expr& e, int var = 0);

}  // namespace holoflow
