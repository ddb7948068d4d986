#pragma once

#include <optional>
#include <string>

#include "holoflow/expr.hpp"
#include "holoflow/poly.hpp"

namespace holoflow {

// h(z) in X = h(z) d/dz. Immutable; copies share the tree.
class FieldExpr {
public:
    FieldExpr() : FieldExpr(Expr::constant(1.0), "1") {}
    FieldExpr(Expr h, std::string source);

    const Expr& expr() const { return h_; }
    const Expr& derivative() const { return dh_; }
    const std::string& source_text() const { return source_; }
    bool is_rational() const { return rational_; }

    Complex operator()(Complex z) const { return h_.eval(z); }
    Complex eval_checked(Complex z) const { return h_.eval_checked(std::span<const Complex>(&z, 1)); }
    Complex deriv(Complex z) const { return dh_.eval(z); }

    // Normalized P/Q pair (common roots cancelled) for rational fields.
    const std::optional<Rational>& rational() const { return rational_form_; }

    std::string print(const std::string& var = "z") const { return print_expr(h_, {var}); }

private:
    Expr h_, dh_;
    std::string source_;
    bool rational_ = true;
    std::optional<Rational> rational_form_;
};

FieldExpr parse_field(const std::string& text);
FieldExpr differentiate(const FieldExpr& f);
Complex evaluate(const FieldExpr& f, Complex z);  // throws EvalError on non-finite values

// Coefficient of the field in the chart w = 1/z: g(w) = -w^2 h(1/w).
FieldExpr chart_at_infinity(const FieldExpr& f);

// h = p(z) exp(q(z)) with p, q rational.
struct ExpPattern {
    Rational prefactor;
    Rational exponent;
};
std::optional<ExpPattern> exp_pattern(const FieldExpr& f);

}  // namespace holoflow
