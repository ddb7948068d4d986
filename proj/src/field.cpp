#include "holoflow/field.hpp"

#include <cmath>

namespace holoflow {

FieldExpr::FieldExpr(Expr h, std::string source)
    : h_(std::move(h)), dh_(holoflow::derivative(h_, 0)), source_(std::move(source)) {
    rational_ = h_.is_rational();
    if (rational_) {
        if (auto r = to_rational(h_)) rational_form_ = r->normalized();
    }
}

FieldExpr parse_field(const std::string& text) { return FieldExpr(parse_expr(text), text); }

FieldExpr differentiate(const FieldExpr& f) {
    Expr d = f.derivative();
    return FieldExpr(d, print_expr(d));
}

Complex evaluate(const FieldExpr& f, Complex z) { return f.eval_checked(z); }

FieldExpr chart_at_infinity(const FieldExpr& f) {
    Expr w = Expr::variable(0);
    if (const auto& r = f.rational()) {
        // -w^2 P(1/w)/Q(1/w) = -w^(2+dQ-dP) P~(w)/Q~(w), P~ and Q~ the reversed polynomials.
        int dp = r->num.degree(), dq = r->den.degree();
        Polynomial num = -r->num.reversed(dp), den = r->den.reversed(dq);
        int shift = 2 + dq - dp;
        if (shift >= 0) num = num * Polynomial::monomial(1.0, shift);
        else den = den * Polynomial::monomial(1.0, -shift);
        Rational g = Rational{num, den}.normalized();
        Expr e = g.to_expr();
        return FieldExpr(e, print_expr(e));
    }
    Expr e = -(pow(w, 2) * substitute(f.expr(), 0, Expr::constant(1.0) / w));
    return FieldExpr(e, print_expr(e));
}

namespace {

struct PatternPart {
    Rational p;
    Rational q;
};

bool is_zero_rational(const Rational& r) { return r.num.is_zero(); }

Rational r_mul(const Rational& a, const Rational& b) { return {a.num * b.num, a.den * b.den}; }
Rational r_add(const Rational& a, const Rational& b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
Rational r_neg(const Rational& a) { return {-a.num, a.den}; }
Rational r_scale(const Rational& a, double s) { return {a.num * Complex(s, 0.0), a.den}; }

bool same_rational(const Rational& a, const Rational& b) {
    Polynomial d = a.num * b.den - b.num * a.den;
    double scale = 0.0;
    for (auto c : (a.num * b.den).coeffs()) scale = std::max(scale, std::abs(c));
    for (auto c : d.coeffs())
        if (std::abs(c) > 1e-12 * std::max(1.0, scale)) return false;
    return true;
}

std::optional<PatternPart> match(const Expr& e) {
    const Node& n = e.root();
    Rational zero{Polynomial::constant(0.0), Polynomial::constant(1.0)};
    if (e.is_rational()) {
        auto r = to_rational(e);
        if (!r) return std::nullopt;
        return PatternPart{*r, zero};
    }
    auto rec = [](const NodePtr& p) { return match(Expr(p)); };
    switch (n.op) {
        case Op::Exp: {
            Expr arg(n.lhs);
            if (!arg.is_rational()) return std::nullopt;
            auto q = to_rational(arg);
            if (!q) return std::nullopt;
            return PatternPart{{Polynomial::constant(1.0), Polynomial::constant(1.0)}, *q};
        }
        case Op::Neg: {
            auto a = rec(n.lhs);
            if (!a) return std::nullopt;
            return PatternPart{r_neg(a->p), a->q};
        }
        case Op::Mul: {
            auto a = rec(n.lhs), b = rec(n.rhs);
            if (!a || !b) return std::nullopt;
            return PatternPart{r_mul(a->p, b->p), r_add(a->q, b->q)};
        }
        case Op::Div: {
            auto a = rec(n.lhs), b = rec(n.rhs);
            if (!a || !b || is_zero_rational(b->p)) return std::nullopt;
            return PatternPart{r_mul(a->p, {b->p.den, b->p.num}), r_add(a->q, r_neg(b->q))};
        }
        case Op::Pow: {
            auto a = rec(n.lhs);
            if (!a) return std::nullopt;
            int k = n.exponent;
            Rational p = k >= 0 ? Rational{a->p.num.pow(k), a->p.den.pow(k)}
                                : Rational{a->p.den.pow(-k), a->p.num.pow(-k)};
            return PatternPart{p, r_scale(a->q, k)};
        }
        case Op::Add:
        case Op::Sub: {
            auto a = rec(n.lhs), b = rec(n.rhs);
            if (!a || !b || !same_rational(a->q, b->q)) return std::nullopt;
            Rational pb = n.op == Op::Add ? b->p : r_neg(b->p);
            return PatternPart{r_add(a->p, pb), a->q};
        }
        default:
            return std::nullopt;
    }
}

}  // namespace

std::optional<ExpPattern> exp_pattern(const FieldExpr& f) {
    if (f.is_rational()) return std::nullopt;
    auto m = match(f.expr());
    if (!m) return std::nullopt;
    return ExpPattern{m->p.normalized(), m->q.normalized()};
}

}  // namespace holoflow
