#include "holoflow/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace holoflow {

Polynomial::Polynomial(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(Complex{});
    trim();
}

Polynomial Polynomial::monomial(Complex c, int degree) {
    std::vector<Complex> v(degree + 1);
    v[degree] = c;
    return Polynomial(std::move(v));
}

void Polynomial::trim() {
    while (c_.size() > 1 && c_.back() == Complex(0.0, 0.0)) c_.pop_back();
}

Complex Polynomial::eval(Complex z) const {
    Complex acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

double Polynomial::magnitude_at(Complex z) const {
    double acc = 0.0, r = std::abs(z);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (degree() == 0) return Polynomial();
    std::vector<Complex> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::reversed(int as_degree) const {
    std::vector<Complex> r(as_degree + 1);
    for (int k = 0; k <= degree() && k <= as_degree; ++k) r[as_degree - k] = c_[k];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<Complex> r(std::max(c_.size(), o.c_.size()));
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = (*this)[k] + o[k];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    std::vector<Complex> r(c_.size() + o.c_.size() - 1);
    for (std::size_t a = 0; a < c_.size(); ++a)
        for (std::size_t b = 0; b < o.c_.size(); ++b) r[a + b] += c_[a] * o.c_[b];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(Complex s) const {
    std::vector<Complex> r(c_);
    for (auto& x : r) x *= s;
    return Polynomial(std::move(r));
}

Polynomial Polynomial::pow(int n) const {
    Polynomial r = constant(1.0), b = *this;
    while (n > 0) {
        if (n & 1) r = r * b;
        b = b * b;
        n >>= 1;
    }
    return r;
}

Polynomial Polynomial::deflate(Complex r) const {
    if (degree() == 0) return constant(0.0);
    std::vector<Complex> q(c_.size() - 1);
    Complex carry = c_.back();
    for (int k = degree() - 1; k >= 0; --k) {
        q[k] = carry;
        carry = c_[k] + carry * r;
    }
    return Polynomial(std::move(q));
}

Expr Polynomial::to_expr() const {
    Expr z = Expr::variable(0);
    Expr acc = Expr::constant(0.0);
    for (int k = degree(); k >= 0; --k) {
        if (c_[k] == Complex(0.0, 0.0)) continue;
        Expr term = Expr::constant(c_[k]) * holoflow::pow(z, k);
        acc = acc + term;
    }
    return acc;
}

namespace {

Complex laguerre(const Polynomial& p, Complex x, bool& ok) {
    const int n = p.degree();
    const double nd = n;
    static constexpr double frac[] = {0.0, 0.5, 0.25, 0.75, 0.13, 0.38, 0.62, 0.88, 1.0};
    for (int iter = 1; iter <= 80 * 8; ++iter) {
        Complex b = p.leading(), d{}, f{};
        double err = std::abs(b), ax = std::abs(x);
        for (int j = n - 1; j >= 0; --j) {
            f = x * f + d;
            d = x * d + b;
            b = x * b + p[j];
            err = std::abs(b) + ax * err;
        }
        err *= 1e-16;
        if (std::abs(b) <= err) {
            ok = true;
            return x;
        }
        Complex g = d / b, g2 = g * g, h = g2 - 2.0 * f / b;
        Complex sq = std::sqrt((nd - 1.0) * (nd * h - g2));
        Complex gp = g + sq, gm = g - sq;
        double abp = std::abs(gp), abm = std::abs(gm);
        if (abp < abm) gp = gm;
        Complex dx = std::max(abp, abm) > 0.0
                         ? nd / gp
                         : std::polar(1.0 + ax, static_cast<double>(iter));
        Complex x1 = x - dx;
        if (x == x1) {
            ok = true;
            return x;
        }
        // Break limit cycles with an occasional fractional step.
        if (iter % 10) x = x1;
        else x -= frac[(iter / 10) % 9] * dx;
    }
    ok = false;
    return x;
}

Complex newton_polish(const Polynomial& p, Complex x) {
    Polynomial dp = p.derivative();
    for (int it = 0; it < 30; ++it) {
        Complex f = p.eval(x), d = dp.eval(x);
        if (d == Complex(0.0, 0.0)) break;
        Complex step = f / d;
        Complex nx = x - step;
        if (std::abs(p.eval(nx)) >= std::abs(f)) break;
        x = nx;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

}  // namespace

std::vector<Root> polynomial_roots(const Polynomial& p) {
    std::vector<Root> out;
    if (p.degree() <= 0) return out;

    std::vector<Complex> raw;
    std::vector<bool> conv;
    Polynomial work = p;
    while (work.degree() > 0) {
        bool ok = false;
        Complex r;
        if (work.degree() == 1) {
            r = -work[0] / work[1];
            ok = true;
        } else {
            r = laguerre(work, Complex(0.0, 0.0), ok);
        }
        r = newton_polish(p, r);
        raw.push_back(r);
        conv.push_back(ok);
        work = work.deflate(r);
    }

    // Cluster repeated roots: members of a cluster share a centroid.
    double scale = 0.0;
    for (auto r : raw) scale = std::max(scale, std::abs(r));
    std::vector<int> cluster(raw.size(), -1);
    int nclusters = 0;
    for (std::size_t a = 0; a < raw.size(); ++a) {
        if (cluster[a] >= 0) continue;
        cluster[a] = nclusters;
        for (std::size_t b = a + 1; b < raw.size(); ++b)
            if (cluster[b] < 0 && std::abs(raw[a] - raw[b]) <= 1e-5 * std::max(1.0, std::abs(raw[a])))
                cluster[b] = nclusters;
        ++nclusters;
    }
    for (int c = 0; c < nclusters; ++c) {
        Complex sum{};
        int m = 0;
        bool ok = true;
        for (std::size_t a = 0; a < raw.size(); ++a)
            if (cluster[a] == c) {
                sum += raw[a];
                ++m;
                ok = ok && conv[a];
            }
        Root root;
        root.value = sum / static_cast<double>(m);
        if (m == 1) root.value = newton_polish(p, root.value);
        root.multiplicity = m;
        double mag = p.magnitude_at(root.value);
        root.residual = mag > 0.0 ? std::abs(p.eval(root.value)) / mag : 0.0;
        root.converged = ok || root.residual <= 1e-10;
        out.push_back(root);
    }
    std::sort(out.begin(), out.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return out;
}

Rational Rational::normalized() const {
    Polynomial n = num, d = den;
    if (n.is_zero()) return {Polynomial::constant(0.0), Polynomial::constant(1.0)};
    if (n.degree() > 0 && d.degree() > 0) {
        auto rn = polynomial_roots(n);
        auto rd = polynomial_roots(d);
        for (const auto& a : rn) {
            for (auto& b : rd) {
                if (b.multiplicity == 0) continue;
                if (std::abs(a.value - b.value) <= 1e-8 * std::max(1.0, std::abs(a.value))) {
                    int common = std::min(a.multiplicity, b.multiplicity);
                    Complex r = 0.5 * (a.value + b.value);
                    for (int k = 0; k < common; ++k) {
                        n = n.deflate(r);
                        d = d.deflate(r);
                    }
                    b.multiplicity -= common;
                    break;
                }
            }
        }
    }
    Complex lead = d.leading();
    return {n * (1.0 / lead), d * (1.0 / lead)};
}

Expr Rational::to_expr() const {
    Expr n = num.to_expr();
    if (den.degree() == 0) return n / Expr::constant(den[0]);
    return n / den.to_expr();
}

std::optional<Rational> to_rational(const Expr& e, int var) {
    const Node& n = e.root();
    auto rec = [&](const NodePtr& p) { return to_rational(Expr(p), var); };
    switch (n.op) {
        case Op::Const:
            return Rational{Polynomial::constant(n.value), Polynomial::constant(1.0)};
        case Op::Var:
            if (n.var != var) return std::nullopt;
            return Rational{Polynomial::monomial(1.0, 1), Polynomial::constant(1.0)};
        case Op::Neg: {
            auto a = rec(n.lhs);
            if (!a) return std::nullopt;
            return Rational{-a->num, a->den};
        }
        case Op::Add:
        case Op::Sub: {
            auto a = rec(n.lhs), b = rec(n.rhs);
            if (!a || !b) return std::nullopt;
            Polynomial lhs = a->num * b->den, rhs = b->num * a->den;
            return Rational{n.op == Op::Add ? lhs + rhs : lhs - rhs, a->den * b->den};
        }
        case Op::Mul: {
            auto a = rec(n.lhs), b = rec(n.rhs);
            if (!a || !b) return std::nullopt;
            return Rational{a->num * b->num, a->den * b->den};
        }
        case Op::Div: {
            auto a = rec(n.lhs), b = rec(n.rhs);
            if (!a || !b || b->num.is_zero()) return std::nullopt;
            return Rational{a->num * b->den, a->den * b->num};
        }
        case Op::Pow: {
            auto a = rec(n.lhs);
            if (!a) return std::nullopt;
            int k = n.exponent;
            if (k >= 0) return Rational{a->num.pow(k), a->den.pow(k)};
            if (a->num.is_zero()) return std::nullopt;
            return Rational{a->den.pow(-k), a->num.pow(-k)};
        }
        default:
            return std::nullopt;
    }
}

}  // namespace holoflow
