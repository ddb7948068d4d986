#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "holoflow/field.hpp"
#include "holoflow/geometry.hpp"

namespace holoflow {

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const;
};

class DictionaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Scalar2 = std::function<double(double, double)>;
using Gradient2 = std::function<Vec2(double, double)>;

// Central-difference step used when partials are not supplied.
double fd_step(double coord);

// Scalar field f(x, y). Expression-backed fields carry exact symbolic
// partials; callable-only fields fall back to central differences.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(Scalar2 value, std::optional<Gradient2> grad = std::nullopt);
    // Expression in variables x (index 0) and y (index 1).
    static ScalarField from_expr(const Expr& e);
    static ScalarField parse(const std::string& text, const std::map<std::string, Complex>& params = {});
    static ScalarField constant(double c);

    double operator()(double x, double y) const { return value_(x, y); }
    Vec2 gradient(double x, double y) const;
    bool has_exact_gradient() const { return grad_.has_value(); }
    const std::optional<Expr>& symbolic() const { return expr_; }

private:
    Scalar2 value_;
    std::optional<Gradient2> grad_;
    std::optional<Expr> expr_;
};

struct Jacobian {
    double ax, ay, bx, by;  // partials of the two components
};

// Planar vector field a d/dx + b d/dy.
class PlanarField {
public:
    PlanarField() = default;
    PlanarField(ScalarField a, ScalarField b, std::string domain_note = {});
    static PlanarField from_exprs(const Expr& a, const Expr& b, std::string domain_note = {});
    static PlanarField parse(const std::string& a, const std::string& b,
                             const std::map<std::string, Complex>& params = {});
    // Field with a full Jacobian supplied by the caller.
    static PlanarField from_callable(std::function<Vec2(double, double)> v,
                                     std::function<Jacobian(double, double)> jac, std::string domain_note = {});

    Vec2 operator()(double x, double y) const;
    Vec2 operator()(Vec2 p) const { return (*this)(p.x, p.y); }
    Jacobian jacobian(double x, double y) const;
    double divergence(double x, double y) const;
    const ScalarField& a() const { return a_; }
    const ScalarField& b() const { return b_; }
    const std::string& domain_note() const { return note_; }
    PlanarField scaled(const ScalarField& rho) const;
    PlanarField negated() const;

private:
    ScalarField a_, b_;
    std::function<Vec2(double, double)> direct_;
    std::function<Jacobian(double, double)> jac_;
    std::string note_;
};

// Rectangle minus small disks around declared singular points.
struct ProbeRegion {
    Window rect{-2, -2, 2, 2};
    std::vector<Complex> excluded;
    double excision = 1e-3;
    int grid = 7;

    std::vector<Vec2> samples() const;
};

// ---- Dictionary between h, omega = dz/h and Psi = int omega.

std::pair<PlanarField, PlanarField> real_imaginary_pair(const FieldExpr& h);

struct FlowBoxResult {
    Complex value;
    double error_estimate;
};
// Path integral of dz/h; the only form in which Psi is ever returned.
FlowBoxResult flow_box(const FieldExpr& h, const PathSpec& path);

// |h(z0) Psi'(z0) - 1| with Psi' from a centered quadrature difference.
double pushforward_residual(const FieldExpr& h, Complex z0);
// Same identity for the real map post(Psi) with Psi based at `base` along a
// straight segment; checks that the real pushforward of Re(X) is (1, 0).
double pushforward_residual_composed(const FieldExpr& h, Complex base, Complex z0,
                                     const std::function<Vec2(Vec2)>& post);

// ---- Planar operators.

struct C1Result {
    ScalarField mu;
    double lie_residual;         // max |df(X)| / (|grad f||X|) over probes
    double formula_disagreement; // max relative gap between the two formulas
};
C1Result op_c1(const ScalarField& f, const PlanarField& X, const ProbeRegion& probe = {});

struct PathIntegralResult {
    double value = 0.0;
    std::optional<double> alternate;  // along the homotopic comparison path
    double closedness_residual = 0.0;
    bool multivalued = false;         // nonzero period on a closed path
};
// Inverse of op_c1: int mu (b dx - a dy) along the path, so that the
// integrating factor of f integrates back to f rather than -f.
PathIntegralResult op_c1_inverse(const ScalarField& mu, const PlanarField& X, const PathSpec& path,
                                 const ProbeRegion& probe = {}, const std::optional<PathSpec>& alternate = {});

// grad f / |grad f|^2.
PlanarField op_c2(const ScalarField& f);

// int (-b dx + a dy)/(ad - bc) along the path (X = (a,b), Y = (c,d)).
PathIntegralResult op_c3(const PlanarField& Y, const PlanarField& X, const PathSpec& path,
                         const std::optional<PathSpec>& alternate = {});

struct C4Result {
    PlanarField Y;
    bool hamiltonian;
    double bracket_residual;  // max |[X,Y] - nu X| / |[X,Y]| scale over probes
};
C4Result op_c4(const ScalarField& mu, const PlanarField& X, const ProbeRegion& probe = {});

struct C5Result {
    ScalarField mu;
    double integrability_residual;  // max |div(mu X)| over probes
};
// Lie integrating factor -1/(ad - bc).
C5Result op_c5(const PlanarField& Y, const PlanarField& X, const ProbeRegion& probe = {});

// (X.grad)Y - (Y.grad)X.
PlanarField commutator(const PlanarField& X, const PlanarField& Y);

// X = rho grad V, Y = rho X_V with X_V = (-V_y, V_x), rho = 1/|grad V|^2.
std::pair<PlanarField, PlanarField> harmonic_pair(const ScalarField& V);

// |[X,Y](z0)|; throws DictionaryError when the frame is degenerate at z0.
double adapted_structure_residual(const PlanarField& X, const PlanarField& Y, Vec2 z0);

// Real line integral of P dx + Q dy along a polyline.
double line_integral(const std::function<Vec2(double, double)>& form, const PathSpec& path);

}  // namespace holoflow
