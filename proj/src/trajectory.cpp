#include "holoflow/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "holoflow/ode.hpp"
#include "holoflow/parallel.hpp"
#include "holoflow/quadrature.hpp"

namespace holoflow {

namespace {

constexpr double pi = std::numbers::pi;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string fmt_point(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
    return buf;
}

double nearest(const std::vector<Complex>& pts, Complex z, std::size_t* which = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        double d = std::abs(z - pts[k]);
        if (d < best) {
            best = d;
            if (which) *which = k;
        }
    }
    return best;
}

}  // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::CompleteForward: return "complete-forward";
        case Verdict::CompleteBackward: return "complete-backward";
        case Verdict::HitsSingularity: return "incomplete-hits-singularity";
        case Verdict::EscapesFiniteTime: return "incomplete-escapes-in-finite-time";
        case Verdict::WindowTruncated: return "window-truncated";
    }
    return "?";
}

std::vector<Complex> Trajectory::polyline() const {
    std::vector<Complex> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.z);
    return out;
}

std::vector<Complex> Trajectory::dense_polyline(double max_gap, std::vector<std::size_t>* step) const {
    std::vector<Complex> out;
    if (step) step->clear();
    if (samples.empty()) return out;
    auto emit = [&](Complex z, std::size_t k) {
        out.push_back(z);
        if (step) step->push_back(k);
    };
    emit(samples.front().z, 0);
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const auto& a = samples[k - 1];
        const auto& b = samples[k];
        double dt = b.tau - a.tau;
        int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(b.z - a.z) / max_gap)));
        if (pieces > 1 && finite(a.v) && finite(b.v) && dt != 0.0) {
            Complex ma = a.v * dt, mb = b.v * dt;
            // Hermite chords can bulge beyond the endpoint distance.
            pieces = std::max(pieces, static_cast<int>(std::ceil((std::abs(ma) + std::abs(mb)) / (2 * max_gap))));
            for (int i = 1; i < pieces; ++i) {
                double s = static_cast<double>(i) / pieces, s2 = s * s, s3 = s2 * s;
                emit((2 * s3 - 3 * s2 + 1) * a.z + (s3 - 2 * s2 + s) * ma + (-2 * s3 + 3 * s2) * b.z + (s3 - s2) * mb,
                     k - 1);
            }
        } else {
            for (int i = 1; i < pieces; ++i) emit(a.z + (b.z - a.z) * (static_cast<double>(i) / pieces), k - 1);
        }
        emit(b.z, k);
    }
    return out;
}

int winding_number(const std::vector<Complex>& loop, Complex p) {
    if (loop.size() < 2) return 0;
    double turn = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        Complex a = loop[k] - p, b = loop[(k + 1) % loop.size()] - p;
        if (a == Complex{} || b == Complex{}) return 0;
        turn += std::arg(b / a);
    }
    return static_cast<int>(std::lround(turn / (2 * pi)));
}

// ------------------------------------------------------------ real flow

namespace {

enum class EventKind { Pole, Zero, Window, Escape, Speed, Section };

// Time spent in the dyadic shells beyond the escape radius; a geometric
// decrease means the point at infinity is reached in finite time.
bool finite_time_tail(const ode::Velocity& vel, Complex z, double R, double dir, double budget,
                      const FlowOptions& opt) {
    std::vector<double> dt;
    double radius = R;
    for (int shell = 0; shell < 4; ++shell) {
        radius *= 2.0;
        ode::Options o;
        o.rtol = opt.rtol;
        o.atol = opt.atol;
        o.direction = dir;
        o.tau_limit = std::max(budget, 1.0);
        o.keep_samples = false;
        o.max_step = 0.5;
        o.max_steps = 200000;
        ode::Event reach;
        const double target = radius;
        reach.g = [target](Complex w, double) { return std::abs(w) - target; };
        reach.direction = +1;
        reach.tolerance = 1e-9 * target;
        ode::Event cap;
        const double lcap = std::log(opt.speed_cap);
        cap.g = [&vel, lcap](Complex w, double) { return std::log(std::abs(vel(w))) - lcap; };
        cap.direction = +1;
        auto r = ode::integrate(vel, z, o, {reach, cap});
        if (r.stop == ode::Stop::Event && r.event_index == 1) return true;  // speed blow-up
        if (r.stop != ode::Stop::Event) return false;
        dt.push_back(std::abs(r.last().tau));
        z = r.last().z;
    }
    for (std::size_t k = 1; k < dt.size(); ++k)
        if (dt[k] > 0.75 * dt[k - 1]) return false;
    return true;
}

}  // namespace

Trajectory integrate_real_flow(const FieldExpr& h, Complex z0, double t_span, double theta, const FlowOptions& opt) {
    Trajectory tr;
    tr.theta = theta;
    tr.direction = t_span >= 0 ? 1 : -1;
    const Complex rot = std::polar(1.0, theta);
    ode::Velocity vel = [&h, rot](Complex z) { return rot * h(z); };
    const double dir = tr.direction;
    auto complete = [&] { return dir > 0 ? Verdict::CompleteForward : Verdict::CompleteBackward; };

    ode::Options o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.direction = dir;
    o.tau_limit = std::abs(t_span);
    o.max_steps = opt.max_steps;
    o.keep_samples = opt.keep_samples;

    std::vector<ode::Event> events;
    std::vector<EventKind> kinds;
    auto add = [&](ode::Event e, EventKind k) {
        events.push_back(std::move(e));
        kinds.push_back(k);
    };
    if (!opt.poles.empty()) {
        ode::Event e;
        e.g = [&opt](Complex z, double) { return nearest(opt.poles, z) - opt.capture; };
        e.direction = -1;
        e.tolerance = 1e-3 * opt.capture;
        add(e, EventKind::Pole);
    }
    if (!opt.zeros.empty()) {
        ode::Event e;
        e.g = [&opt](Complex z, double) { return nearest(opt.zeros, z) - opt.capture; };
        e.direction = -1;
        e.tolerance = 1e-3 * opt.capture;
        add(e, EventKind::Zero);
    }
    if (opt.window) {
        const Window w = *opt.window;
        ode::Event e;
        e.g = [w](Complex z, double) {
            return std::max({w.x0 - z.real(), z.real() - w.x1, w.y0 - z.imag(), z.imag() - w.y1});
        };
        e.direction = +1;
        e.tolerance = 1e-12 * std::max(w.width(), w.height());
        add(e, EventKind::Window);
    }
    {
        const double R = opt.escape_radius;
        ode::Event e;
        e.g = [R](Complex z, double) { return std::abs(z) - R; };
        e.direction = +1;
        e.tolerance = 1e-9 * R;
        add(e, EventKind::Escape);
    }
    {
        const double lcap = std::log(opt.speed_cap);
        ode::Event e;
        e.g = [&h, lcap](Complex z, double) { return std::log(std::abs(h(z))) - lcap; };
        e.direction = +1;
        e.tolerance = 1e-6;
        add(e, EventKind::Speed);
    }
    Complex u0 = rot * h(z0);
    if (opt.detect_period && finite(u0) && std::abs(u0) > 0.0) {
        u0 *= dir / std::abs(u0);
        const double tol = opt.return_tol * std::max(1.0, std::abs(z0));
        ode::Event e;
        e.g = [z0, u0](Complex z, double) { return ((z - z0) * std::conj(u0)).real(); };
        e.direction = +1;
        e.tolerance = 1e-14 * std::max(1.0, std::abs(z0));
        e.on_cross = [z0, tol](const ode::Sample& s) { return std::abs(s.z - z0) < tol; };
        add(e, EventKind::Section);
    }

    ode::Result r = ode::integrate(vel, z0, o, events);
    tr.samples.reserve(r.samples.size());
    for (const auto& s : r.samples) tr.samples.push_back({s.tau, s.z, rot * h(s.z)});

    const ode::Sample last = r.last();
    switch (r.stop) {
        case ode::Stop::TauLimit:
        case ode::Stop::SigmaLimit:
            tr.verdict = complete();
            break;
        case ode::Stop::MaxSteps:
            tr.verdict = complete();
            tr.note = "step budget exhausted";
            break;
        case ode::Stop::NonFinite:
        case ode::Stop::StepUnderflow:
        case ode::Stop::Reversal:
            tr.verdict = Verdict::HitsSingularity;
            tr.hit_point = last.z;
            tr.note = r.message + " near an unlocated singular point";
            break;
        case ode::Stop::Event:
            switch (kinds[r.event_index]) {
                case EventKind::Pole: {
                    std::size_t k = 0;
                    nearest(opt.poles, last.z, &k);
                    tr.verdict = Verdict::HitsSingularity;
                    tr.hit_point = opt.poles[k];
                    break;
                }
                case EventKind::Zero: {
                    std::size_t k = 0;
                    nearest(opt.zeros, last.z, &k);
                    tr.verdict = complete();
                    tr.tends_to_zero = true;
                    tr.hit_point = opt.zeros[k];
                    break;
                }
                case EventKind::Window:
                    tr.verdict = Verdict::WindowTruncated;
                    break;
                case EventKind::Escape: {
                    double left = std::abs(t_span) - std::abs(last.tau);
                    if (finite_time_tail(vel, last.z, opt.escape_radius, dir, std::max(left, 1e6), opt)) {
                        tr.verdict = Verdict::EscapesFiniteTime;
                    } else {
                        tr.verdict = complete();
                        tr.note = "left the escape radius with a divergent tail";
                    }
                    break;
                }
                case EventKind::Speed: {
                    std::size_t k = 0;
                    if (nearest(opt.poles, last.z, &k) < 1e-3) {
                        tr.verdict = Verdict::HitsSingularity;
                        tr.hit_point = opt.poles[k];
                    } else {
                        tr.verdict = Verdict::EscapesFiniteTime;
                        tr.note = "speed cap reached";
                    }
                    break;
                }
                case EventKind::Section:
                    tr.verdict = complete();
                    tr.period = std::abs(last.tau);
                    break;
            }
            break;
    }
    if (opt.measure_length) tr.gx_length = gx_length(h, tr);
    return tr;
}

// ---------------------------------------------------------- gx lengths

double gx_length(const FieldExpr& h, const std::vector<Complex>& curve) {
    double total = 0.0;
    for (std::size_t k = 1; k < curve.size(); ++k) {
        Complex a = curve[k - 1], d = curve[k] - a;
        if (d == Complex{}) continue;
        double len = std::abs(d);
        total += integrate_real(
            [&](double t) {
                Complex v = h(a + t * d);
                if (!finite(v) || v == Complex{}) throw QuadratureError("curve meets a singular point of h");
                return len / std::abs(v);
            },
            0.0, 1.0, 1e-12);
    }
    return total;
}

namespace {

using Gauss7 = boost::math::quadrature::gauss<double, 7>;

// Fixed rule on [a, b], halved while the halves disagree with the whole;
// smooth steps cost one comparison, steps running into a zero refine.
double bisected_gauss(const std::function<double(double)>& f, double a, double b, double whole, int depth) {
    double m = 0.5 * (a + b);
    double left = Gauss7::integrate(f, a, m), right = Gauss7::integrate(f, m, b);
    if (depth == 0 || std::abs(left + right - whole) <= 1e-11 * std::abs(left + right)) return left + right;
    return bisected_gauss(f, a, m, left, depth - 1) + bisected_gauss(f, m, b, right, depth - 1);
}

}  // namespace

double gx_length(const FieldExpr& h, const Trajectory& traj) {
    double total = 0.0;
    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        const auto& a = traj.samples[k - 1];
        const auto& b = traj.samples[k];
        double dt = b.tau - a.tau;
        if (dt == 0.0) continue;
        if (!finite(a.v) || !finite(b.v)) {
            // Segment glued to a singular endpoint: unit speed by construction.
            total += std::abs(dt);
            continue;
        }
        Complex ma = a.v * dt, mb = b.v * dt;
        auto point = [&](double s) {
            double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * a.z + (s3 - 2 * s2 + s) * ma + (-2 * s3 + 3 * s2) * b.z + (s3 - s2) * mb;
        };
        auto tangent = [&](double s) {
            double s2 = s * s;
            return (6 * s2 - 6 * s) * a.z + (3 * s2 - 4 * s + 1) * ma + (-6 * s2 + 6 * s) * b.z + (3 * s2 - 2 * s) * mb;
        };
        auto speed = [&](double s) { return std::abs(tangent(s)) / std::abs(h(point(s))); };
        total += bisected_gauss(speed, 0.0, 1.0, Gauss7::integrate(speed, 0.0, 1.0), 10);
    }
    return total;
}

Period period_around(const FieldExpr& h, const PathSpec& loop) {
    loop.validate();
    auto r = integrate_path([&h](Complex z) { return 1.0 / h(z); }, loop, 1e-10);
    Complex v = r.value;
    if (std::abs(v) <= 1e-10) v = Complex{};
    return {v, is_real(v), v != Complex{} && is_purely_imaginary(v)};
}

// ------------------------------------------------------------ separatrices

std::vector<SeparatrixLaunch> separatrix_launches(const FieldExpr& h, Complex pole, int k, double theta, double radius,
                                                  std::vector<std::string>* warnings) {
    const int n = 2 * k + 2;
    // Leading coefficient c of h ~ c (z - p)^{-k}: mean of (z-p)^k h on a circle.
    Complex c{};
    const int nodes = 64;
    for (int j = 0; j < nodes; ++j) {
        Complex d = std::polar(radius, 2 * pi * (j + 0.5) / nodes);
        c += h(pole + d) * std::pow(d, k);
    }
    c /= static_cast<double>(nodes);
    const Complex unrot = std::polar(1.0, -theta);
    const double scale = std::pow(radius, k + 1) / ((k + 1) * std::abs(c));
    auto psi = [&](double phi) {
        Complex z = pole + std::polar(radius, phi);
        return unrot * integrate_segment_gauss([&h](Complex w) { return 1.0 / h(w); }, pole, z);
    };
    auto f = [&](double phi) { return psi(phi).imag(); };
    const double spacing = pi / (k + 1);

    std::vector<double> angles;
    bool solver_ok = true;
    for (int m = 0; m < n && solver_ok; ++m) {
        double guess = (theta + std::arg(c) + m * pi) / (k + 1);
        double p0 = guess, p1 = guess + 1e-3 * spacing, f0 = f(p0), f1 = f(p1);
        bool done = false;
        for (int it = 0; it < 40; ++it) {
            if (std::abs(f1) <= 1e-10 * scale) {
                done = true;
                break;
            }
            if (f1 == f0) break;
            double p2 = p1 - f1 * (p1 - p0) / (f1 - f0);
            p0 = p1;
            f0 = f1;
            p1 = p2;
            f1 = f(p1);
            if (std::abs(p1 - guess) > 0.25 * spacing) break;
        }
        if (!done) solver_ok = false;
        angles.push_back(p1);
    }

    if (!solver_ok) {
        if (warnings) warnings->push_back("launch-angle solver failed at " + fmt_point(pole) + "; bracketing " +
                                          std::to_string(8 * (k + 1)) + " rays");
        angles.clear();
        const int rays = 8 * (k + 1);
        const double off = 0.1234 * 2 * pi / rays;
        for (int j = 0; j < rays; ++j) {
            double a = off + 2 * pi * j / rays, b = off + 2 * pi * (j + 1) / rays;
            double fa = f(a), fb = f(b);
            if ((fa < 0) == (fb < 0)) continue;
            for (int it = 0; it < 60; ++it) {
                double m = 0.5 * (a + b), fm = f(m);
                if ((fm < 0) == (fa < 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            angles.push_back(0.5 * (a + b));
        }
        if (static_cast<int>(angles.size()) != n && warnings)
            warnings->push_back("bracketing found " + std::to_string(angles.size()) + " separatrix angles at " +
                                fmt_point(pole) + ", expected " + std::to_string(n));
    }

    std::vector<SeparatrixLaunch> out;
    for (double phi : angles) {
        double a = std::remainder(phi, 2 * pi);
        if (a < 0) a += 2 * pi;
        Complex v = psi(a);
        out.push_back({pole + std::polar(radius, a), a, v.real() > 0 ? 1 : -1, std::abs(v.real())});
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.angle < y.angle; });
    return out;
}

std::vector<Trajectory> separatrices_from(const FieldExpr& h, const Singularity& sing, const SeparatrixOptions& opt,
                                          std::vector<std::string>* warnings) {
    std::vector<Trajectory> out;
    if (sing.at_infinity()) {
        if (sing.kind != SingularityKind::Pole && sing.kind != SingularityKind::Regular) return out;
        FieldExpr g = chart_at_infinity(h);
        for (const auto& l : separatrix_launches(g, 0.0, -sing.order, opt.theta, opt.launch_radius, warnings)) {
            Complex z = 1.0 / l.point;
            Trajectory t = integrate_real_flow(h, z, l.direction * opt.tau_budget, opt.theta, opt.flow);
            for (auto& s : t.samples) s.tau += l.direction * l.tau_offset;
            out.push_back(std::move(t));
        }
        return out;
    }
    if (sing.kind != SingularityKind::Pole) return out;
    const Complex p = *sing.location;
    double r = opt.launch_radius;
    for (Complex q : opt.flow.poles)
        if (q != p) r = std::min(r, 0.1 * std::abs(q - p));
    for (Complex q : opt.flow.zeros) r = std::min(r, 0.1 * std::abs(q - p));
    const FlowOptions& flow = opt.flow;
    for (const auto& l : separatrix_launches(h, p, -sing.order, opt.theta, r, warnings)) {
        Trajectory t = integrate_real_flow(h, l.point, l.direction * opt.tau_budget, opt.theta, flow);
        for (auto& s : t.samples) s.tau += l.direction * l.tau_offset;
        t.samples.insert(t.samples.begin(), {0.0, p, Complex(NAN, NAN)});
        t.gx_length += l.tau_offset;
        out.push_back(std::move(t));
    }
    return out;
}

// --------------------------------------------------------------- skeleton

namespace {

double distance_to_polyline(Complex p, const std::vector<Complex>& line) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < line.size(); ++k)
        if (finite(line[k - 1]) && finite(line[k])) best = std::min(best, distance_to_segment(p, line[k - 1], line[k]));
    if (line.size() == 1) best = std::abs(p - line[0]);
    return best;
}

struct Fate {
    Verdict fwd = Verdict::CompleteForward, bwd = Verdict::CompleteBackward;
    double turn_fwd = 0.0, turn_bwd = 0.0;
    int center = -1;
    bool periodic = false;

    bool incomplete() const { return is_incomplete(fwd) || is_incomplete(bwd); }
    bool differs(const Fate& o) const {
        return fwd != o.fwd || bwd != o.bwd || center != o.center || std::abs(turn_fwd - o.turn_fwd) > pi / 2 ||
               std::abs(turn_bwd - o.turn_bwd) > pi / 2;
    }
};

double turning(const Trajectory& t) {
    double total = 0.0;
    for (std::size_t k = 1; k < t.samples.size(); ++k) {
        Complex a = t.samples[k - 1].v, b = t.samples[k].v;
        if (finite(a) && finite(b) && a != Complex{} && b != Complex{}) total += std::arg(b / a);
    }
    return total;
}

int vertex_index(const std::vector<Singularity>& v, Complex p) {
    for (std::size_t k = 0; k < v.size(); ++k)
        if (std::abs(*v[k].location - p) <= 1e-9 * std::max(1.0, std::abs(p))) return static_cast<int>(k);
    return -1;
}

void assign_ends(SkeletonCurve& c, const std::vector<Singularity>& vertices) {
    const Trajectory& t = c.traj;
    c.truncated = t.verdict == Verdict::WindowTruncated;
    if (t.verdict == Verdict::EscapesFiniteTime) c.end_vertex = -2;
    else if (t.hit_point) c.end_vertex = vertex_index(vertices, *t.hit_point);
}

}  // namespace

Skeleton separatrix_skeleton(const FieldExpr& h, const Window& window, const SkeletonOptions& opt) {
    Skeleton sk;
    sk.theta = opt.theta;
    sk.window = window;
    SingularityCensus census = analyze_singularities(h, window, opt.locate);
    sk.vertices = census.finite;
    sk.infinity = census.infinity;
    sk.warnings = census.warnings;

    FlowOptions flow;
    for (const auto& s : sk.vertices) {
        if (s.kind == SingularityKind::Pole) flow.poles.push_back(*s.location);
        if (s.kind == SingularityKind::Zero) flow.zeros.push_back(*s.location);
    }
    if (const auto& r = h.rational()) {
        // Poles outside the window still end trajectories.
        for (const Root& root : polynomial_roots(r->den))
            if (!window.contains(root.value)) flow.poles.push_back(root.value);
        for (const Root& root : polynomial_roots(r->num))
            if (!window.contains(root.value)) flow.zeros.push_back(root.value);
    }
    sk.flow = flow;
    const double diag = std::hypot(window.width(), window.height());

    SeparatrixOptions sep;
    sep.theta = opt.theta;
    sep.tau_budget = opt.curve_tau;
    sep.flow = flow;
    sep.flow.window = window;
    sep.flow.rtol = opt.curve_rtol;  // Im Psi along far-out separatrices bounds strip heights
    for (std::size_t v = 0; v < sk.vertices.size(); ++v) {
        if (sk.vertices[v].kind != SingularityKind::Pole) continue;
        for (auto& t : separatrices_from(h, sk.vertices[v], sep, &sk.warnings)) {
            SkeletonCurve c{std::move(t), "pole", static_cast<int>(v), -1, false};
            assign_ends(c, sk.vertices);
            sk.curves.push_back(std::move(c));
        }
    }
    if (h.is_rational() && sk.infinity.order <= 0) {
        for (auto& t : separatrices_from(h, sk.infinity, sep, &sk.warnings)) {
            SkeletonCurve c{std::move(t), "infinity", -2, -1, false};
            assign_ends(c, sk.vertices);
            sk.curves.push_back(std::move(c));
        }
    }
    // Pole-to-pole separatrices are traced from both ends; keep one copy.
    std::vector<SkeletonCurve> unique;
    for (auto& c : sk.curves) {
        bool dup = false;
        if (c.end_vertex >= 0 && c.traj.samples.size() > 2) {
            Complex mid = c.traj.samples[c.traj.samples.size() / 2].z;
            for (const auto& u : unique)
                if (u.start_vertex == c.end_vertex && u.end_vertex == c.start_vertex &&
                    distance_to_polyline(mid, u.traj.polyline()) < 1e-6 * diag)
                    dup = true;
        }
        if (!dup) unique.push_back(std::move(c));
    }
    sk.curves = std::move(unique);

    if (!opt.sweep || opt.sweep_grid < 2) return sk;

    // Completeness sweep.
    const int n = opt.sweep_grid;
    FlowOptions sweep_flow = flow;
    sweep_flow.max_steps = 200000;
    sweep_flow.rtol = 1e-7;  // fates only; traced curves use tighter settings
    sweep_flow.measure_length = false;
    std::vector<Complex> zeros = flow.zeros;
    auto fate_of = [&](Complex seed) {
        Fate f;
        Trajectory fw = integrate_real_flow(h, seed, opt.sweep_tau, opt.theta, sweep_flow);
        Trajectory bw = integrate_real_flow(h, seed, -opt.sweep_tau, opt.theta, sweep_flow);
        f.fwd = fw.verdict;
        f.bwd = bw.verdict;
        f.turn_fwd = turning(fw);
        f.turn_bwd = turning(bw);
        if (fw.period) {
            f.periodic = true;
            auto loop = fw.polyline();
            for (std::size_t k = 0; k < zeros.size(); ++k)
                if (winding_number(loop, zeros[k]) != 0) {
                    f.center = static_cast<int>(k);
                    break;
                }
        }
        return f;
    };
    std::vector<Complex> seeds(n * n);
    std::vector<bool> usable(n * n, true);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            Complex s(window.x0 + (i + 0.5) * window.width() / n, window.y0 + (j + 0.5) * window.height() / n);
            seeds[j * n + i] = s;
            for (const auto& v : sk.vertices)
                if (std::abs(s - *v.location) < 1e-3 * diag) usable[j * n + i] = false;
        }
    std::vector<Fate> fates(n * n);
    parallel_for(n * n, [&](std::size_t idx) {
        if (usable[idx]) fates[idx] = fate_of(seeds[idx]);
    });

    SweepStats& st = sk.sweep;
    st.column_witnesses.assign(n, 0);
    st.row_witnesses.assign(n, 0);
    for (int idx = 0; idx < n * n; ++idx) {
        if (!usable[idx]) continue;
        const Fate& f = fates[idx];
        ++st.seeds;
        st.integrations += 2;
        if (f.periodic) ++st.periodic;
        bool inc = f.incomplete();
        if (!inc) ++st.complete;
        if (f.fwd == Verdict::HitsSingularity || f.bwd == Verdict::HitsSingularity) ++st.hits_singularity;
        if (f.fwd == Verdict::EscapesFiniteTime || f.bwd == Verdict::EscapesFiniteTime) ++st.escapes;
        if (inc && h.is_rational()) {
            bool explained = false;
            for (const auto& c : sk.curves)
                explained = explained || distance_to_polyline(seeds[idx], c.traj.polyline()) < 1e-4 * diag;
            if (!explained) ++st.unexplained_incomplete;
        }
    }
    if (h.is_rational()) return sk;

    // Transcendental fields: bisect between neighbouring seeds whose fates
    // differ; an incomplete midpoint witnesses a separatrix.
    struct Pair {
        int a, b, column, row;
    };
    std::vector<Pair> pairs;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int idx = j * n + i;
            if (!usable[idx]) continue;
            if (j + 1 < n && usable[idx + n] && fates[idx].differs(fates[idx + n])) pairs.push_back({idx, idx + n, i, -1});
            if (i + 1 < n && usable[idx + 1] && fates[idx].differs(fates[idx + 1])) pairs.push_back({idx, idx + 1, -1, j});
        }
    std::vector<std::optional<Complex>> found(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        Complex a = seeds[pairs[p].a], b = seeds[pairs[p].b];
        Fate fa = fates[pairs[p].a];
        for (int it = 0; it < 200 && std::abs(b - a) > 1e-13 * diag; ++it) {
            Complex m = 0.5 * (a + b);
            Fate fm = fate_of(m);
            if (fm.incomplete()) {
                found[p] = m;
                return;
            }
            if (fm.differs(fa)) b = m;
            else {
                a = m;
                fa = fm;
            }
        }
    });
    sk.heuristic = true;
    FlowOptions trace = flow;
    trace.window = window;
    trace.rtol = opt.curve_rtol;
    trace.atol = 1e-14;
    trace.detect_period = false;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (!found[p]) continue;
        Complex w = *found[p];
        st.witnesses.push_back(w);
        if (pairs[p].column >= 0) ++st.column_witnesses[pairs[p].column];
        else ++st.row_witnesses[pairs[p].row];
        bool known = false;
        for (const auto& c : sk.curves) known = known || distance_to_polyline(w, c.traj.polyline()) < 1e-4 * diag;
        if (known) continue;
        Trajectory fw = integrate_real_flow(h, w, opt.curve_tau, opt.theta, trace);
        Trajectory bw = integrate_real_flow(h, w, -opt.curve_tau, opt.theta, trace);
        Trajectory joined = bw;
        std::reverse(joined.samples.begin(), joined.samples.end());
        joined.samples.insert(joined.samples.end(), fw.samples.begin() + 1, fw.samples.end());
        joined.direction = 1;
        joined.verdict = is_incomplete(fw.verdict) ? fw.verdict : bw.verdict;
        joined.hit_point = fw.hit_point ? fw.hit_point : bw.hit_point;
        joined.gx_length = fw.gx_length + bw.gx_length;
        joined.note = "forward " + verdict_name(fw.verdict) + ", backward " + verdict_name(bw.verdict);
        SkeletonCurve c{std::move(joined), "sweep", -1, -1, false};
        c.truncated = fw.verdict == Verdict::WindowTruncated || bw.verdict == Verdict::WindowTruncated;
        auto end_of = [&](const Trajectory& t) {
            if (t.verdict == Verdict::EscapesFiniteTime) return -2;
            if (t.hit_point) return vertex_index(sk.vertices, *t.hit_point);
            return -1;
        };
        c.start_vertex = end_of(bw);
        c.end_vertex = end_of(fw);
        sk.curves.push_back(std::move(c));
    }
    return sk;
}

}  // namespace holoflow
