#include "holoflow/dictionary.hpp"

#include <algorithm>
#include <cmath>

#include "holoflow/quadrature.hpp"

namespace holoflow {

double Vec2::norm() const { return std::hypot(x, y); }

double fd_step(double coord) { return 1e-5 * std::max(1.0, std::abs(coord)); }

namespace {

double re_eval(const Expr& e, double x, double y) {
    Complex v[2] = {Complex(x, 0.0), Complex(y, 0.0)};
    return e.eval(std::span<const Complex>(v, 2)).real();
}

Vec2 fd_gradient(const Scalar2& f, double x, double y) {
    double hx = fd_step(x), hy = fd_step(y);
    return {(f(x + hx, y) - f(x - hx, y)) / (2 * hx), (f(x, y + hy) - f(x, y - hy)) / (2 * hy)};
}

bool both_symbolic(const ScalarField& a, const ScalarField& b) { return a.symbolic() && b.symbolic(); }

Expr dx(const Expr& e) { return derivative(e, 0); }
Expr dy(const Expr& e) { return derivative(e, 1); }

}  // namespace

// ---------------------------------------------------------- ScalarField

ScalarField::ScalarField(Scalar2 value, std::optional<Gradient2> grad)
    : value_(std::move(value)), grad_(std::move(grad)) {}

ScalarField ScalarField::from_expr(const Expr& e) {
    Expr ex = dx(e), ey = dy(e);
    ScalarField f([e](double x, double y) { return re_eval(e, x, y); },
                  [ex, ey](double x, double y) { return Vec2{re_eval(ex, x, y), re_eval(ey, x, y)}; });
    f.expr_ = e;
    return f;
}

ScalarField ScalarField::parse(const std::string& text, const std::map<std::string, Complex>& params) {
    Scope scope;
    scope.variables = {"x", "y"};
    scope.constants = params;
    return from_expr(parse_expr(text, scope));
}

ScalarField ScalarField::constant(double c) { return from_expr(Expr::constant(c)); }

Vec2 ScalarField::gradient(double x, double y) const {
    if (grad_) return (*grad_)(x, y);
    return fd_gradient(value_, x, y);
}

// ---------------------------------------------------------- PlanarField

PlanarField::PlanarField(ScalarField a, ScalarField b, std::string domain_note)
    : a_(std::move(a)), b_(std::move(b)), note_(std::move(domain_note)) {}

PlanarField PlanarField::from_exprs(const Expr& a, const Expr& b, std::string domain_note) {
    return PlanarField(ScalarField::from_expr(a), ScalarField::from_expr(b), std::move(domain_note));
}

PlanarField PlanarField::parse(const std::string& a, const std::string& b,
                               const std::map<std::string, Complex>& params) {
    return PlanarField(ScalarField::parse(a, params), ScalarField::parse(b, params));
}

PlanarField PlanarField::from_callable(std::function<Vec2(double, double)> v,
                                       std::function<Jacobian(double, double)> jac, std::string domain_note) {
    PlanarField f(ScalarField([v](double x, double y) { return v(x, y).x; }),
                  ScalarField([v](double x, double y) { return v(x, y).y; }), std::move(domain_note));
    f.direct_ = std::move(v);
    f.jac_ = std::move(jac);
    return f;
}

Vec2 PlanarField::operator()(double x, double y) const {
    if (direct_) return direct_(x, y);
    return {a_(x, y), b_(x, y)};
}

Jacobian PlanarField::jacobian(double x, double y) const {
    if (jac_) return jac_(x, y);
    if (direct_) {
        double hx = fd_step(x), hy = fd_step(y);
        Vec2 px = direct_(x + hx, y), mx = direct_(x - hx, y);
        Vec2 py = direct_(x, y + hy), my = direct_(x, y - hy);
        return {(px.x - mx.x) / (2 * hx), (py.x - my.x) / (2 * hy), (px.y - mx.y) / (2 * hx),
                (py.y - my.y) / (2 * hy)};
    }
    Vec2 ga = a_.gradient(x, y), gb = b_.gradient(x, y);
    return {ga.x, ga.y, gb.x, gb.y};
}

double PlanarField::divergence(double x, double y) const {
    Jacobian j = jacobian(x, y);
    return j.ax + j.by;
}

PlanarField PlanarField::scaled(const ScalarField& rho) const {
    if (!direct_ && both_symbolic(a_, b_) && rho.symbolic())
        return from_exprs(*rho.symbolic() * *a_.symbolic(), *rho.symbolic() * *b_.symbolic(), note_);
    PlanarField self = *this;
    return PlanarField(ScalarField([self, rho](double x, double y) { return rho(x, y) * self(x, y).x; }),
                       ScalarField([self, rho](double x, double y) { return rho(x, y) * self(x, y).y; }), note_);
}

PlanarField PlanarField::negated() const { return scaled(ScalarField::constant(-1.0)); }

std::vector<Vec2> ProbeRegion::samples() const {
    std::vector<Vec2> pts;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            // Irrational offsets keep probes off symmetry axes.
            double u = (i + 0.5 + 0.1464466) / (grid + 0.3), v = (j + 0.5 + 0.2071068) / (grid + 0.4);
            Complex p(rect.x0 + u * rect.width(), rect.y0 + v * rect.height());
            bool keep = true;
            for (Complex s : excluded)
                if (std::abs(p - s) < excision) keep = false;
            if (keep) pts.push_back({p.real(), p.imag()});
        }
    return pts;
}

// ----------------------------------------------------------- dictionary

std::pair<PlanarField, PlanarField> real_imaginary_pair(const FieldExpr& h) {
    auto X = PlanarField::from_callable(
        [h](double x, double y) {
            Complex v = h(Complex(x, y));
            return Vec2{v.real(), v.imag()};
        },
        [h](double x, double y) {
            Complex d = h.deriv(Complex(x, y));
            return Jacobian{d.real(), -d.imag(), d.imag(), d.real()};
        },
        "Re(h d/dz) for h = " + h.source_text());
    auto Y = PlanarField::from_callable(
        [h](double x, double y) {
            Complex v = h(Complex(x, y));
            return Vec2{-v.imag(), v.real()};
        },
        [h](double x, double y) {
            Complex d = h.deriv(Complex(x, y));
            return Jacobian{-d.imag(), -d.real(), d.real(), -d.imag()};
        },
        "Im(h d/dz) for h = " + h.source_text());
    return {X, Y};
}

FlowBoxResult flow_box(const FieldExpr& h, const PathSpec& path) {
    path.validate();
    auto r = integrate_path([&h](Complex z) { return 1.0 / h(z); }, path, 1e-9);
    return {r.value, r.error};
}

double pushforward_residual(const FieldExpr& h, Complex z0) {
    double d = 1e-5 * std::max(1.0, std::abs(z0));
    Complex hz = h(z0);
    auto r = integrate_segment([&h](Complex z) { return 1.0 / h(z); }, z0 - d, z0 + d, 1e-14);
    Complex dpsi = r.value / (2.0 * d);
    return std::abs(hz * dpsi - 1.0);
}

double pushforward_residual_composed(const FieldExpr& h, Complex base, Complex z0,
                                     const std::function<Vec2(Vec2)>& post) {
    auto omega = [&h](Complex z) { return 1.0 / h(z); };
    Complex psi0 = integrate_segment(omega, base, z0, 1e-12).value;
    Complex hz = h(z0);
    Complex dir = hz / std::abs(hz);
    double d = 1e-5 * std::max(1.0, std::abs(z0));
    Complex psi_p = psi0 + integrate_segment(omega, z0, z0 + d * dir, 1e-15).value;
    Complex psi_m = psi0 + integrate_segment(omega, z0, z0 - d * dir, 1e-15).value;
    Vec2 fp = post({psi_p.real(), psi_p.imag()}), fm = post({psi_m.real(), psi_m.imag()});
    Vec2 push = (fp - fm) * (std::abs(hz) / (2 * d));
    return (push - Vec2{1.0, 0.0}).norm();
}

double line_integral(const std::function<Vec2(double, double)>& form, const PathSpec& path) {
    double total = 0.0;
    for (std::size_t k = 1; k < path.waypoints.size(); ++k) {
        Complex a = path.waypoints[k - 1], d = path.waypoints[k] - a;
        total += integrate_real(
            [&](double t) {
                Complex p = a + t * d;
                Vec2 w = form(p.real(), p.imag());
                return w.x * d.real() + w.y * d.imag();
            },
            0.0, 1.0, 1e-13);
    }
    return total;
}

C1Result op_c1(const ScalarField& f, const PlanarField& X, const ProbeRegion& probe) {
    C1Result out;
    out.lie_residual = 0.0;
    out.formula_disagreement = 0.0;
    for (Vec2 p : probe.samples()) {
        Vec2 v = X(p), g = f.gradient(p.x, p.y);
        if (v.x == 0.0 && v.y == 0.0)
            throw DictionaryError("a = b = 0 at probe point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
        double scale = g.norm() * v.norm();
        if (scale == 0.0) continue;
        out.lie_residual = std::max(out.lie_residual, std::abs(g.dot(v)) / scale);
        if (std::abs(v.x) > 1e-8 * v.norm() && std::abs(v.y) > 1e-8 * v.norm()) {
            double m1 = -g.y / v.x, m2 = g.x / v.y;
            out.formula_disagreement =
                std::max(out.formula_disagreement, std::abs(m1 - m2) / std::max(std::abs(m1), std::abs(m2)));
        }
    }
    if (out.lie_residual > 1e-6 || out.formula_disagreement > 1e-6)
        throw DictionaryError("inconsistent formulas: f is not a first integral of X (Lie residual " +
                              std::to_string(out.lie_residual) + ")");
    out.mu = ScalarField([f, X](double x, double y) {
        Vec2 v = X(x, y), g = f.gradient(x, y);
        return std::abs(v.x) >= std::abs(v.y) ? -g.y / v.x : g.x / v.y;
    });
    return out;
}

namespace {

double relative_divergence(const ScalarField& mu, const PlanarField& X, Vec2 p) {
    Vec2 v = X(p), gm = mu.gradient(p.x, p.y);
    Jacobian j = X.jacobian(p.x, p.y);
    double m = mu(p.x, p.y);
    double div = gm.x * v.x + gm.y * v.y + m * (j.ax + j.by);
    double scale = gm.norm() * v.norm() + std::abs(m) * (std::abs(j.ax) + std::abs(j.ay) + std::abs(j.bx) + std::abs(j.by));
    return std::abs(div) / std::max(scale, 1e-12);
}

}  // namespace

PathIntegralResult op_c1_inverse(const ScalarField& mu, const PlanarField& X, const PathSpec& path,
                                 const ProbeRegion& probe, const std::optional<PathSpec>& alternate) {
    PathIntegralResult out;
    for (Vec2 p : probe.samples()) out.closedness_residual = std::max(out.closedness_residual, relative_divergence(mu, X, p));
    if (out.closedness_residual > 1e-6)
        throw DictionaryError("curl residual " + std::to_string(out.closedness_residual) +
                              " exceeded: mu is not an integrating factor");
    auto form = [&](double x, double y) {
        Vec2 v = X(x, y);
        double m = mu(x, y);
        return Vec2{m * v.y, -m * v.x};
    };
    out.value = line_integral(form, path);
    if (alternate) out.alternate = line_integral(form, *alternate);
    out.multivalued = path.closed() && std::abs(out.value) > 1e-8;
    return out;
}

PlanarField op_c2(const ScalarField& f) {
    if (const auto& e = f.symbolic()) {
        Expr fx = dx(*e), fy = dy(*e);
        Expr n2 = pow(fx, 2) + pow(fy, 2);
        return PlanarField::from_exprs(fx / n2, fy / n2, "grad f/|grad f|^2");
    }
    return PlanarField(ScalarField([f](double x, double y) {
                           Vec2 g = f.gradient(x, y);
                           if (g.x == 0.0 && g.y == 0.0) throw DictionaryError("vanishing gradient");
                           return g.x / g.dot(g);
                       }),
                       ScalarField([f](double x, double y) {
                           Vec2 g = f.gradient(x, y);
                           if (g.x == 0.0 && g.y == 0.0) throw DictionaryError("vanishing gradient");
                           return g.y / g.dot(g);
                       }),
                       "grad f/|grad f|^2");
}

PathIntegralResult op_c3(const PlanarField& Y, const PlanarField& X, const PathSpec& path,
                         const std::optional<PathSpec>& alternate) {
    auto form = [&](double x, double y) {
        Vec2 a = X(x, y), c = Y(x, y);
        double det = a.x * c.y - a.y * c.x;
        if (std::abs(det) <= 1e-12 * a.norm() * c.norm() || det == 0.0)
            throw DictionaryError("degenerate frame (ad - bc = 0) on path");
        return Vec2{-a.y / det, a.x / det};
    };
    for (std::size_t k = 1; k < path.waypoints.size(); ++k)
        for (int s = 0; s <= 64; ++s) {
            Complex p = path.waypoints[k - 1] + (s / 64.0) * (path.waypoints[k] - path.waypoints[k - 1]);
            form(p.real(), p.imag());
        }
    PathIntegralResult out;
    out.value = line_integral(form, path);
    if (alternate) out.alternate = line_integral(form, *alternate);
    out.multivalued = path.closed() && std::abs(out.value) > 1e-8;
    return out;
}

PlanarField commutator(const PlanarField& X, const PlanarField& Y) {
    auto bracket = [X, Y](double x, double y) {
        Vec2 vx = X(x, y), vy = Y(x, y);
        Jacobian jx = X.jacobian(x, y), jy = Y.jacobian(x, y);
        return Vec2{jy.ax * vx.x + jy.ay * vx.y - (jx.ax * vy.x + jx.ay * vy.y),
                    jy.bx * vx.x + jy.by * vx.y - (jx.bx * vy.x + jx.by * vy.y)};
    };
    return PlanarField::from_callable(bracket, nullptr, "[X,Y]");
}

namespace {

double bracket_scale(const PlanarField& X, const PlanarField& Y, Vec2 p) {
    Jacobian jx = X.jacobian(p.x, p.y), jy = Y.jacobian(p.x, p.y);
    auto jn = [](const Jacobian& j) { return std::abs(j.ax) + std::abs(j.ay) + std::abs(j.bx) + std::abs(j.by); };
    return jn(jy) * X(p).norm() + jn(jx) * Y(p).norm();
}

}  // namespace

C4Result op_c4(const ScalarField& mu, const PlanarField& X, const ProbeRegion& probe) {
    auto pts = probe.samples();
    double maxdiv = 0.0;
    for (Vec2 p : pts) maxdiv = std::max(maxdiv, std::abs(X.divergence(p.x, p.y)));
    C4Result out{PlanarField(), maxdiv <= 1e-8, 0.0};

    if (out.hamiltonian) {
        for (Vec2 p : pts)
            if (mu.gradient(p.x, p.y).norm() == 0.0)
                throw DictionaryError("both branch denominators vanish: grad mu = 0 and X is Hamiltonian");
        out.Y = op_c2(mu);
    } else {
        for (Vec2 p : pts) {
            double m = mu(p.x, p.y);
            if (m * m * X.divergence(p.x, p.y) == 0.0)
                throw DictionaryError("both branch denominators vanish: mu^2 div X = 0");
        }
        if (mu.symbolic() && both_symbolic(X.a(), X.b())) {
            const Expr& m = *mu.symbolic();
            Expr div = dx(*X.a().symbolic()) + dy(*X.b().symbolic());
            Expr den = pow(m, 2) * div;
            out.Y = PlanarField::from_exprs(-dy(m) / den, dx(m) / den, "X_mu/(mu^2 div X)");
        } else {
            out.Y = PlanarField(ScalarField([mu, X](double x, double y) {
                                    double m = mu(x, y);
                                    return -mu.gradient(x, y).y / (m * m * X.divergence(x, y));
                                }),
                                ScalarField([mu, X](double x, double y) {
                                    double m = mu(x, y);
                                    return mu.gradient(x, y).x / (m * m * X.divergence(x, y));
                                }),
                                "X_mu/(mu^2 div X)");
        }
    }
    PlanarField C = commutator(X, out.Y);
    for (Vec2 p : pts) {
        Vec2 c = C(p), v = X(p);
        double nu = c.dot(v) / v.dot(v);
        double scale = std::max(bracket_scale(X, out.Y, p), 1e-300);
        out.bracket_residual = std::max(out.bracket_residual, (c - v * nu).norm() / scale);
    }
    return out;
}

C5Result op_c5(const PlanarField& Y, const PlanarField& X, const ProbeRegion& probe) {
    C5Result out;
    if (both_symbolic(X.a(), X.b()) && both_symbolic(Y.a(), Y.b())) {
        Expr det = *X.a().symbolic() * *Y.b().symbolic() - *X.b().symbolic() * *Y.a().symbolic();
        out.mu = ScalarField::from_expr(Expr::constant(-1.0) / det);
    } else {
        out.mu = ScalarField([X, Y](double x, double y) {
            Vec2 a = X(x, y), c = Y(x, y);
            return -1.0 / (a.x * c.y - a.y * c.x);
        });
    }
    out.integrability_residual = 0.0;
    for (Vec2 p : probe.samples()) {
        Vec2 a = X(p), c = Y(p);
        if (a.x * c.y - a.y * c.x == 0.0) throw DictionaryError("degenerate frame");
        out.integrability_residual = std::max(out.integrability_residual, relative_divergence(out.mu, X, p));
    }
    return out;
}

std::pair<PlanarField, PlanarField> harmonic_pair(const ScalarField& V) {
    if (const auto& e = V.symbolic()) {
        Expr vx = dx(*e), vy = dy(*e);
        Expr n2 = pow(vx, 2) + pow(vy, 2);
        return {PlanarField::from_exprs(vx / n2, vy / n2, "rho grad V"),
                PlanarField::from_exprs(-vy / n2, vx / n2, "rho X_V")};
    }
    auto comp = [V](int which) {
        return ScalarField([V, which](double x, double y) {
            Vec2 g = V.gradient(x, y);
            double n2 = g.dot(g);
            if (n2 == 0.0) throw DictionaryError("critical point of V");
            switch (which) {
                case 0: return g.x / n2;
                case 1: return g.y / n2;
                case 2: return -g.y / n2;
                default: return g.x / n2;
            }
        });
    };
    return {PlanarField(comp(0), comp(1), "rho grad V"), PlanarField(comp(2), comp(3), "rho X_V")};
}

double adapted_structure_residual(const PlanarField& X, const PlanarField& Y, Vec2 z0) {
    Vec2 a = X(z0), c = Y(z0);
    if (std::abs(a.cross(c)) <= 1e-10 * a.norm() * c.norm() || a.norm() == 0.0 || c.norm() == 0.0)
        throw DictionaryError("degenerate frame at probe point");
    return commutator(X, Y)(z0).norm();
}

}  // namespace holoflow
