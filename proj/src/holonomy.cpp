#include "holoflow/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "holoflow/ode.hpp"
#include "holoflow/surface.hpp"

namespace holoflow {

namespace {

using std::numbers::pi;

Vec2 to_vec(Complex z) { return {z.real(), z.imag()}; }
Complex to_complex(Vec2 v) { return {v.x, v.y}; }

Vec2 normalized(Vec2 v) {
    double n = v.norm();
    if (!(n > 0)) throw std::invalid_argument("zero direction");
    return v * (1.0 / n);
}

// Unit-speed reparametrization: same orbits, bounded velocity.
ode::Velocity unit_speed(const PlanarField& X) {
    return [X](Complex z) {
        Vec2 v = X(z.real(), z.imag());
        double n = std::hypot(v.x, v.y);
        if (!(n > 0) || !std::isfinite(n)) return Complex(NAN, NAN);
        return Complex(v.x / n, v.y / n);
    };
}

struct Crossing {
    std::optional<Vec2> point;
    double arc = 0.0;
    std::string failure;
};

std::string stop_text(const ode::Result& r) {
    switch (r.stop) {
    case ode::Stop::TauLimit: return "no crossing within the arc budget";
    case ode::Stop::NonFinite: return "hits a singular point";
    case ode::Stop::Reversal: return "hits a singular point (direction reversal)";
    case ode::Stop::StepUnderflow: return "step size underflow";
    case ode::Stop::MaxSteps: return "step budget exhausted";
    default: return r.message.empty() ? "integration stopped" : r.message;
    }
}

// First crossing of the line {g = 0} at which `accept` holds.
Crossing flow_to(const PlanarField& X, Vec2 start, int direction, std::function<double(Vec2)> g, int crossing_dir,
                 std::function<bool(Vec2)> accept, double tol, double rtol, double arc_budget, double escape) {
    ode::Options o;
    o.rtol = rtol;
    o.atol = 1e-15;
    o.direction = direction;
    o.tau_limit = arc_budget;
    o.keep_samples = false;
    ode::Event cross;
    cross.g = [g](Complex z, double) { return g(to_vec(z)); };
    cross.direction = crossing_dir;
    cross.tolerance = tol;
    cross.on_cross = [accept](const ode::Sample& s) { return accept(to_vec(s.z)); };
    ode::Event away;
    away.g = [escape](Complex z, double) { return std::abs(z) - escape; };
    away.direction = +1;
    auto r = ode::integrate(unit_speed(X), to_complex(start), o, {cross, away});
    Crossing c;
    c.arc = std::abs(r.last().tau);
    if (r.stop == ode::Stop::Event && r.event_index == 0) {
        c.point = to_vec(r.last().z);
    } else if (r.stop == ode::Stop::Event) {
        c.failure = "escapes";
    } else {
        c.failure = stop_text(r);
    }
    return c;
}

HolonomySample sample_once(const PlanarField& X, const Transversal& a, const Transversal& b, double s, int direction,
                           const HolonomyOptions& opt) {
    HolonomySample out;
    out.s = s;
    const double hi = b.length * (1 + 1e-9);
    const double lo = -std::max(opt.crossing_tol, 1e-12);
    auto c = flow_to(
        X, a.at(s), direction, [&b](Vec2 p) { return b.offset(p); }, 0,
        [&b, lo, hi](Vec2 p) {
            double t = b.param(p);
            return t >= lo && t <= hi;
        },
        opt.crossing_tol, opt.rtol, opt.arc_budget, opt.escape_radius);
    out.arc = c.arc;
    if (!c.point) {
        out.failure = c.failure;
        return out;
    }
    double t = std::max(0.0, b.param(*c.point));
    out.hol = t;
    out.flat = t < 1e-290;
    return out;
}

// Richardson extrapolation of F(s) = F0 + F1 s + ... on a halving grid.
std::vector<double> richardson_diagonal(std::vector<double> row, int depth) {
    std::vector<double> diag{row.back()};
    double p = 2.0;
    for (int d = 0; d < depth && row.size() > 1; ++d) {
        std::vector<double> next;
        for (std::size_t j = 0; j + 1 < row.size(); ++j) next.push_back((p * row[j + 1] - row[j]) / (p - 1));
        row = std::move(next);
        diag.push_back(row.back());
        p *= 2.0;
    }
    return diag;
}

void assess(HolonomyReport& rep, const HolonomyOptions& opt) {
    const std::size_t n = rep.samples.size();
    for (const auto& s : rep.samples) rep.quotients.push_back(s.hol ? *s.hol / s.s : NAN);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double d0 = rep.quotients[j], d1 = rep.quotients[j + 1];
        rep.ratios.push_back(d0 > 0 ? d1 / d0 : (d0 == 0 && d1 == 0 ? 0.0 : NAN));
    }
    if (n < 5) {
        rep.reason = "fewer than five samples";
        return;
    }
    const std::size_t first = n - 5;
    for (std::size_t j = first; j < n; ++j) {
        if (!rep.samples[j].hol) {
            rep.reason = "sample s=" + std::to_string(rep.samples[j].s) + " failed: " + rep.samples[j].failure;
            return;
        }
    }
    std::vector<double> r(rep.ratios.begin() + static_cast<long>(first), rep.ratios.end());
    const double tau = opt.ratio_tol;
    if (std::all_of(r.begin(), r.end(), [tau](double x) { return x < 1 - tau; })) {
        rep.verdict = HolonomyVerdict::NonC1;
        rep.reason = "hol(s)/s vanishes across four refinements";
    } else if (std::all_of(r.begin(), r.end(), [tau](double x) { return x > 1 + tau; })) {
        rep.verdict = HolonomyVerdict::NonC1;
        rep.reason = "hol(s)/s diverges across four refinements";
    }

    // Derivative estimates from the finest five quotients.
    std::vector<double> s, D;
    for (std::size_t j = first; j < n; ++j) {
        s.push_back(rep.samples[j].s);
        D.push_back(rep.quotients[j]);
    }
    auto t1 = richardson_diagonal(D, 3);
    rep.first_derivative_table = t1;
    const double a = t1.back();
    std::vector<double> B;
    for (std::size_t j = 0; j < s.size(); ++j) B.push_back((D[j] - a) / s[j]);
    auto t2 = richardson_diagonal(B, 2);
    const double b = t2.back();
    std::vector<double> C;
    for (std::size_t j = 0; j < s.size(); ++j) C.push_back((D[j] - a - b * s[j]) / (s[j] * s[j]));
    auto t3 = richardson_diagonal(C, 1);
    const double c = t3.back();
    if (std::isfinite(a)) rep.derivatives[0] = a;
    if (std::isfinite(b)) rep.derivatives[1] = 2 * b;
    if (std::isfinite(c)) rep.derivatives[2] = 6 * c;
    if (rep.verdict == HolonomyVerdict::NonC1) return;

    const bool in_band = std::all_of(r.begin(), r.end(), [tau](double x) { return std::abs(x - 1) <= tau; });
    if (!in_band) {
        rep.reason = "hol(s)/s neither converges nor degenerates monotonically";
        return;
    }
    if (std::abs(r.back() - 1) > 0.5 * std::abs(r.front() - 1) + 1e-8) {
        rep.reason = "ratio of quotients does not approach 1";
        return;
    }
    if (!(a > 0) || !std::isfinite(a)) {
        rep.reason = "first derivative estimate is not positive";
        return;
    }
    const double spread = std::abs(t1[t1.size() - 1] - t1[t1.size() - 2]);
    if (spread > 1e-3 * std::max(1.0, std::abs(a))) {
        rep.reason = "first derivative estimate unsettled";
        return;
    }
    for (int k = 1; k < 3; ++k) {
        if (!rep.derivatives[k] || std::abs(*rep.derivatives[k]) > opt.derivative_bound) {
            rep.reason = "derivative of order " + std::to_string(k + 1) + " unbounded";
            return;
        }
    }
    rep.verdict = HolonomyVerdict::DiffeoConsistent;
    rep.reason = "quotients converge; derivatives up to order three bounded";
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

ConditionVerdict combine(const std::vector<ConditionVerdict>& vs) {
    if (std::any_of(vs.begin(), vs.end(), [](auto v) { return v == ConditionVerdict::Fail; }))
        return ConditionVerdict::Fail;
    if (std::all_of(vs.begin(), vs.end(), [](auto v) { return v == ConditionVerdict::Pass; }))
        return ConditionVerdict::Pass;
    return ConditionVerdict::Inconclusive;
}

}  // namespace

// ------------------------------------------------------------ transversals

Vec2 Transversal::unit() const { return normalized(direction); }
Vec2 Transversal::at(double s) const { return base + unit() * s; }
double Transversal::param(Vec2 p) const { return (p - base).dot(unit()); }
double Transversal::offset(Vec2 p) const { return unit().cross(p - base); }

std::vector<double> Transversal::grid(int levels) const {
    if (!samples.empty()) return samples;
    std::vector<double> g;
    for (int j = 0; j < levels; ++j) g.push_back(std::ldexp(length, -j));
    return g;
}

double Transversal::transversality(const PlanarField& X, int levels) const {
    double worst = 1.0;
    auto check = [&](double s) {
        Vec2 p = at(s), v = X(p);
        double n = v.norm();
        if (!(n > 0) || !std::isfinite(n)) return;  // the base may sit on a singular point
        worst = std::min(worst, std::abs(unit().cross(v)) / n);
    };
    check(0.0);
    for (double s : grid(levels)) check(s);
    return worst;
}

std::string holonomy_verdict_name(HolonomyVerdict v) {
    switch (v) {
    case HolonomyVerdict::DiffeoConsistent: return "diffeo-consistent";
    case HolonomyVerdict::NonC1: return "non-C1";
    case HolonomyVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

HolonomyReport holonomy_map(const PlanarField& X, const Transversal& sigma1, const Transversal& sigma2,
                            const HolonomyOptions& opt) {
    if (!(sigma1.length > 0) || !(sigma2.length > 0)) throw HolonomyError("transversal length must be positive");
    HolonomyReport rep;
    rep.transversality = std::min(sigma1.transversality(X, opt.levels), sigma2.transversality(X, 1));
    if (rep.transversality < 1e-6) throw HolonomyError("transversal is tangent to the field");
    const auto grid = sigma1.grid(opt.levels);
    if (grid.empty()) throw HolonomyError("empty sample grid");

    int dir = opt.direction >= 0 ? 1 : -1;
    std::optional<HolonomySample> head;
    if (opt.direction == 0) {
        auto fwd = sample_once(X, sigma1, sigma2, grid.front(), +1, opt);
        if (fwd.hol) {
            head = fwd;
        } else {
            auto back = sample_once(X, sigma1, sigma2, grid.front(), -1, opt);
            if (back.hol) {
                dir = -1;
                head = back;
            } else {
                head = fwd;
            }
        }
    }
    rep.direction = dir;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j == 0 && head) {
            rep.samples.push_back(*head);
            continue;
        }
        rep.samples.push_back(sample_once(X, sigma1, sigma2, grid[j], dir, opt));
    }
    assess(rep, opt);
    return rep;
}

// ------------------------------------------------------------ first return

FirstReturnReport first_return_map(const PlanarField& X, Vec2 seed, const ReturnOptions& opt) {
    Vec2 v = X(seed);
    if (!(v.norm() > 0) || !std::isfinite(v.norm())) throw HolonomyError("seed is a singular point");
    const Vec2 along = normalized(v);
    const Vec2 n{-along.y, along.x};
    FirstReturnReport rep;
    rep.seed = seed;
    rep.normal = n;
    const double window = 4 * opt.half_width;
    auto g = [seed, along](Vec2 p) { return (p - seed).dot(along); };
    auto param = [seed, n](Vec2 p) { return (p - seed).dot(n); };
    auto run = [&](double s) {
        const Vec2 start = seed + n * s;
        auto c = flow_to(
            X, start, +1, g, +1, [&](Vec2 p) { return std::abs(param(p)) <= window; }, opt.crossing_tol, opt.rtol,
            opt.arc_budget, opt.escape_radius);
        if (!c.point) {
            if (c.failure == "escapes") throw HolonomyError("no return: the orbit escapes");
            throw HolonomyError("no return within budget: " + c.failure);
        }
        return std::pair{param(*c.point), c.arc};
    };
    auto [p0, arc0] = run(0.0);
    if (std::abs(p0) > opt.closure_tol)
        throw HolonomyError("orbit through the seed does not close (return offset " + fmt(p0) + ")");
    rep.orbit_length = arc0;
    const int m = std::max(opt.samples, 1);
    for (int j = 0; j < m; ++j) {
        double s = m == 1 ? 0.0 : -opt.half_width + 2 * opt.half_width * j / (m - 1);
        double p = s == 0.0 ? p0 : run(s).first;
        rep.map.emplace_back(s, p);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(p - s));
    }
    return rep;
}

// ------------------------------------------------------------ flow boxes

FlowBoxCheck flow_box_residual(const PlanarField& X, const FlowBoxCandidate& c, const std::vector<Vec2>& points) {
    FlowBoxCheck out;
    for (Vec2 p : points) {
        Vec2 v = X(p) * c.rho(p.x, p.y);
        double r1 = c.psi1.gradient(p.x, p.y).dot(v) - 1.0;
        double r2 = c.psi2.gradient(p.x, p.y).dot(v);
        double r = std::hypot(r1, r2);
        out.residuals.emplace_back(p, r);
        out.max_residual = std::max(out.max_residual, std::isfinite(r) ? r : INFINITY);
        ++out.samples;
    }
    return out;
}

// ------------------------------------------------------------ admissibility

std::string condition_verdict_name(ConditionVerdict v) {
    switch (v) {
    case ConditionVerdict::Pass: return "pass";
    case ConditionVerdict::Fail: return "fail";
    case ConditionVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

AdmissibilityReport admissibility_report(const AdmissibilityInput& in) {
    AdmissibilityReport rep;

    Condition finite{"separatrices", ConditionVerdict::Inconclusive, {}};
    if (!in.separatrices_finite) {
        finite.detail = "no finiteness witness";
    } else if (*in.separatrices_finite) {
        finite.verdict = ConditionVerdict::Pass;
        finite.detail = "finitely many separatrices";
    } else {
        finite.verdict = ConditionVerdict::Fail;
        finite.detail = "separatrices accumulate";
    }
    rep.conditions.push_back(finite);

    Condition ret{"first-return", ConditionVerdict::Inconclusive, {}};
    std::vector<ConditionVerdict> rv;
    double worst = 0.0;
    for (Vec2 seed : in.periodic_seeds) {
        ReturnResult r{seed, std::nullopt, {}};
        try {
            r.report = first_return_map(in.X, seed, in.returns);
            worst = std::max(worst, r.report->max_deviation);
            rv.push_back(r.report->max_deviation <= 1e-6 ? ConditionVerdict::Pass : ConditionVerdict::Fail);
        } catch (const HolonomyError& e) {
            r.error = e.what();
            rv.push_back(ConditionVerdict::Inconclusive);
        }
        rep.returns.push_back(std::move(r));
    }
    ret.verdict = combine(rv);
    ret.detail = in.periodic_seeds.empty() ? "no periodic orbits probed"
                                           : "max deviation from identity " + fmt(worst);
    rep.conditions.push_back(ret);

    Condition sec{"sector-holonomy", ConditionVerdict::Inconclusive, {}};
    std::vector<ConditionVerdict> sv;
    int non_c1 = 0;
    for (const auto& probe : in.sectors) {
        SectorResult r{probe.name, {}};
        try {
            r.report = holonomy_map(in.X, probe.in, probe.out, in.holonomy);
        } catch (const HolonomyError& e) {
            r.report.reason = e.what();
        }
        switch (r.report.verdict) {
        case HolonomyVerdict::DiffeoConsistent: sv.push_back(ConditionVerdict::Pass); break;
        case HolonomyVerdict::NonC1:
            sv.push_back(ConditionVerdict::Fail);
            ++non_c1;
            break;
        case HolonomyVerdict::Inconclusive: sv.push_back(ConditionVerdict::Inconclusive); break;
        }
        rep.sectors.push_back(std::move(r));
    }
    sec.verdict = combine(sv);
    sec.detail = in.sectors.empty() ? "no hyperbolic sectors probed"
                                    : std::to_string(in.sectors.size()) + " sectors, " + std::to_string(non_c1) +
                                          " non-C1";
    rep.conditions.push_back(sec);

    Condition words{"multi-saddle-words", ConditionVerdict::Inconclusive, {}};
    std::vector<ConditionVerdict> wv;
    std::string listed;
    for (const auto& w : in.words) {
        wv.push_back(w.ok ? ConditionVerdict::Pass : ConditionVerdict::Fail);
        listed += (listed.empty() ? "" : ", ") + w.where + ": " + w.word.str();
    }
    words.verdict = combine(wv);
    words.detail = in.words.empty() ? "no words checked" : listed;
    rep.words = in.words;
    rep.conditions.push_back(words);

    if (in.flow_box) {
        auto check = flow_box_residual(in.X, *in.flow_box, in.flow_box_points);
        Condition fb{"global-flow-box", ConditionVerdict::Inconclusive, {}};
        fb.verdict = check.samples > 0 && check.max_residual <= 1e-6 ? ConditionVerdict::Pass
                                                                     : ConditionVerdict::Fail;
        fb.detail = "max pushforward residual " + fmt(check.max_residual) + " over " +
                    std::to_string(check.samples) + " points";
        rep.flow_box = fb;
        rep.flow_box_check = std::move(check);
    }

    std::vector<ConditionVerdict> all;
    for (const auto& c : rep.conditions) all.push_back(c.verdict);
    rep.verdict = combine(all);
    if (rep.flow_box && rep.flow_box->verdict == ConditionVerdict::Pass) rep.verdict = ConditionVerdict::Pass;
    return rep;
}

namespace {

PlanarField real_part(const FieldExpr& h, double theta) {
    const Complex rot = std::polar(1.0, theta);
    return PlanarField::from_callable(
        [h, rot](double x, double y) {
            Complex v = rot * h(Complex(x, y));
            return Vec2{v.real(), v.imag()};
        },
        [h, rot](double x, double y) {
            Complex d = rot * h.deriv(Complex(x, y));
            return Jacobian{d.real(), -d.imag(), d.imag(), d.real()};
        },
        "Re(h d/dz)");
}

double clearance(const Skeleton& sk, Complex p) {
    double r = 0.5;
    for (const auto& v : sk.vertices)
        if (v.location && *v.location != p) r = std::min(r, 0.3 * std::abs(*v.location - p));
    for (Complex q : sk.flow.poles)
        if (q != p) r = std::min(r, 0.3 * std::abs(q - p));
    for (Complex q : sk.flow.zeros)
        if (q != p) r = std::min(r, 0.3 * std::abs(q - p));
    return r;
}

}  // namespace

AdmissibilityReport admissibility_report(const FieldExpr& h, const Skeleton& skeleton, const HolonomyOptions& opt) {
    AdmissibilityInput in;
    in.X = real_part(h, skeleton.theta);
    in.holonomy = opt;
    in.separatrices_finite = skeleton.sweep.unexplained_incomplete == 0 ? std::optional<bool>(true) : std::nullopt;
    for (const auto& v : skeleton.vertices) {
        if (!v.location) continue;
        const Complex p = *v.location;
        const std::string where = "(" + fmt(p.real()) + "," + fmt(p.imag()) + ")";
        if (v.kind == SingularityKind::Pole) {
            const int k = -v.order;
            const double r = clearance(skeleton, p);
            auto launches = separatrix_launches(h, p, k, skeleton.theta, r);
            const std::size_t n = launches.size();
            for (std::size_t j = 0; j < n; ++j) {
                const auto& a = launches[j];
                const auto& b = launches[(j + 1) % n];
                SectorProbe probe;
                probe.name = where + " sector " + std::to_string(j);
                Complex ta = Complex(0, 1) * std::polar(1.0, a.angle);
                Complex tb = Complex(0, -1) * std::polar(1.0, b.angle);
                // The field turns by (k+1) times the polar angle, so the
                // segments stay short of half the sector opening.
                const double len = 0.25 * r * std::tan(pi / (2 * k + 2));
                probe.in = {to_vec(a.point), to_vec(ta), len, {}};
                probe.out = {to_vec(b.point), to_vec(tb), 2 * len, {}};
                in.sectors.push_back(std::move(probe));
            }
            WordResult w{where, v.word, SectorWord::repeat(Letter::H, 2 * k + 2), true};
            w.ok = v.word == *w.expected;
            in.words.push_back(std::move(w));
        } else if (v.kind == SingularityKind::Zero && v.word == SectorWord({Letter::C})) {
            in.periodic_seeds.push_back(to_vec(p + clearance(skeleton, p)));
        }
    }
    return admissibility_report(in);
}

// ------------------------------------------------------------ builtins

namespace {

std::map<std::string, Complex> cparams(const std::map<std::string, double>& p) {
    std::map<std::string, Complex> out;
    for (auto [k, v] : p) out[k] = v;
    return out;
}

std::map<std::string, double> merged(const std::string& name, std::map<std::string, double> defaults,
                                     const std::map<std::string, double>& given) {
    for (const auto& [k, v] : given) {
        if (!defaults.count(k)) throw std::invalid_argument("unknown parameter '" + k + "' for " + name);
        defaults[k] = v;
    }
    return defaults;
}

// Sector of the quadrant with the given y sign, from the y axis to the x axis.
SectorProbe quadrant_probe(const std::string& name, int ysign, double eps) {
    return {name, {{0, 1.0 * ysign}, {1, 0}, eps, {}}, {{1, 0}, {0, 1.0 * ysign}, 1.0, {}}};
}

// Same sector entered from the x axis: flat holonomies are sampled through
// their inverse, whose images stay representable and whose orbits are not
// stiff.
SectorProbe quadrant_probe_reversed(const std::string& name, int ysign, double eps) {
    return {name, {{1, 0}, {0, 1.0 * ysign}, eps, {}}, {{0, 1.0 * ysign}, {1, 0}, 1.0, {}}};
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"cusp-n-m", "linear-saddle", "lotka-volterra", "muller", "saddle-node", "symmetric-cubic"};
}

BuiltinField linear_saddle(double lambda) { return builtin_field("linear-saddle", {{"lambda", lambda}}); }

BuiltinField builtin_field(const std::string& name, const std::map<std::string, double>& given) {
    BuiltinField b;
    b.name = name;
    if (name == "lotka-volterra") {
        b.params = merged(name, {{"a", 1}, {"b", 1}, {"d", 1}, {"e", 1}}, given);
        auto p = cparams(b.params);
        b.description = "(a x + d x y) d/dx + (b y + e x y) d/dy";
        b.input.X = PlanarField::parse("a*x+d*x*y", "b*y+e*x*y", p);
        b.first_integral = ScalarField::parse("a*log(y)-b*log(x)+d*y-e*x", p);
        b.probe.rect = {0.3, 0.3, 3.0, 3.0};
    } else if (name == "muller") {
        b.params = merged(name, {}, given);
        b.description = "-x^4 d/dx + (x^3 y + 2 x y + 2) d/dy";
        b.input.X = PlanarField::parse("-x^4", "x^3*y+2*x*y+2");
        b.first_integral = ScalarField::parse("(x*y+1)*exp(-1/x^2)");
        // Hyperbolic sector at infinity between the negative y axis and the
        // branch x y = -1, 0 < x < 1; orbits run from the branch to the axis.
        b.input.sectors.push_back({"infinity", {{0.25, -4.0}, {0, 1}, 0.5, {}}, {{0.0, -2.0}, {1, 0}, 0.5, {}}});
        b.probe.rect = {0.1, -3.0, 2.0, -0.1};
    } else if (name == "saddle-node") {
        b.params = merged(name, {{"lambda", 1}}, given);
        auto p = cparams(b.params);
        b.description = "x^2 d/dx - lambda y d/dy";
        b.input.X = PlanarField::parse("x^2", "-lambda*y", p);
        b.first_integral = ScalarField::parse("exp(lambda/x)/y", p);
        b.input.sectors = {quadrant_probe_reversed("upper", +1, 0.25), quadrant_probe_reversed("lower", -1, 0.25)};
        b.input.separatrices_finite = true;
        auto surface = build_surface(saddle_node_gluing());
        // The finite vertex of the glued model is the singular point.
        for (const auto& v : surface.vertices)
            if (!v.ideal) b.input.words.push_back({"origin", v.word, std::nullopt, true});
        b.probe.excluded = {0.0};
        b.probe.rect = {0.2, -2, 2, 2};
    } else if (name == "cusp-n-m") {
        b.params = merged(name, {{"n", 2}, {"m", 3}}, given);
        const int n = static_cast<int>(b.params["n"]), m = static_cast<int>(b.params["m"]);
        if (n < 2 || m < 2 || n != b.params["n"] || m != b.params["m"])
            throw std::invalid_argument("cusp exponents must be integers >= 2");
        auto p = cparams(b.params);
        b.description = "m y^(m-1) d/dx + n x^(n-1) d/dy";
        b.input.X = PlanarField::parse("m*y^" + std::to_string(m - 1), "n*x^" + std::to_string(n - 1), p);
        b.first_integral = ScalarField::parse("x^" + std::to_string(n) + "-y^" + std::to_string(m));
        FlowBoxCandidate c;
        c.rho = ScalarField::parse("exp(-x)/(m*y^" + std::to_string(m) + "+n*x^" + std::to_string(n - 1) + ")", p);
        c.psi1 = ScalarField::parse("y*exp(x)");
        c.psi2 = *b.first_integral;
        b.input.flow_box = c;
        std::mt19937 rng(20);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        while (b.input.flow_box_points.size() < 20) {
            double x = u(rng), y = u(rng);
            double den = m * std::pow(y, m) + n * std::pow(x, n - 1);
            if (std::hypot(x, y) < 0.2 || std::abs(den) < 0.2) continue;
            b.input.flow_box_points.push_back({x, y});
        }
        b.input.separatrices_finite = true;
        b.probe.excluded = {0.0};
    } else if (name == "linear-saddle") {
        b.params = merged(name, {{"lambda", 1}}, given);
        auto p = cparams(b.params);
        b.description = "x d/dx - lambda y d/dy";
        b.input.X = PlanarField::parse("x", "-lambda*y", p);
        b.first_integral = ScalarField::parse("exp(lambda*log(x))*y", p);
        b.input.sectors = {quadrant_probe("first-quadrant", +1, 0.1)};
        b.input.separatrices_finite = true;
        b.probe.rect = {0.2, 0.2, 2, 2};
    } else if (name == "symmetric-cubic") {
        b.params = merged(name, {}, given);
        b.description = "x^3 d/dx - y^3 d/dy";
        b.input.X = PlanarField::parse("x^3", "-y^3");
        b.first_integral = ScalarField::parse("1/x^2+1/y^2");
        b.input.sectors = {quadrant_probe("first-quadrant", +1, 0.25)};
        b.input.separatrices_finite = true;
        b.probe.rect = {0.2, 0.2, 2, 2};
    } else {
        throw std::invalid_argument("unknown builtin field '" + name + "'");
    }
    return b;
}

}  // namespace holoflow
