// One PASS/FAIL line per acceptance criterion. Tolerances and time budgets
// are pinned here; the exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "holoflow/commands.hpp"
#include "holoflow/holonomy.hpp"

using namespace holoflow;
using std::numbers::pi;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Collects the first few failed checks of a criterion.
class Checker {
public:
    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok_ = false;
        if (++failures_ <= 3) notes_ << (notes_.tellp() > 0 ? "; " : "") << what;
    }
    void note(const std::string& s) { info_ << (info_.tellp() > 0 ? ", " : "") << s; }
    Outcome done() {
        std::string d = ok_ ? info_.str() : notes_.str();
        if (failures_ > 3) d += " (+" + std::to_string(failures_ - 3) + " more)";
        return {ok_, d};
    }

private:
    bool ok_ = true;
    int failures_ = 0;
    std::ostringstream notes_, info_;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<Complex> random_points(int n, unsigned seed, double lo, double hi) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Complex> out;
    for (int k = 0; k < n; ++k) out.emplace_back(u(rng), u(rng));
    return out;
}

std::string pole_text(int k) { return k == 1 ? "1/z" : "1/z^" + std::to_string(k); }

// ------------------------------------------------------------ criteria

Outcome pole_words() {
    Checker c;
    for (int k = 1; k <= 4; ++k) {
        auto h = parse_field(pole_text(k));
        auto w = classify(h, analyze_point(h, 0.0));
        c.expect(w == SectorWord::repeat(Letter::H, 2 * k + 2), "k=" + std::to_string(k) + " word " + w.str());
    }
    return c.done();
}

// Random P/Q with integer coefficients in [-3, 3] and degrees <= 6; leading
// coefficients are nonzero so every root lies inside |z| < 4.
Outcome sphere_degree() {
    Checker c;
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> coef(-3, 3), lead(1, 3), deg(0, 6);
    auto poly = [&](int n) {
        std::string s = std::to_string(lead(rng)) + "*z^" + std::to_string(n);
        for (int d = n - 1; d >= 0; --d) {
            int a = coef(rng);
            if (a == 0) continue;
            s += (a > 0 ? "+" : "") + std::to_string(a) + "*z^" + std::to_string(d);
        }
        return "(" + s + ")";
    };
    for (int t = 0; t < 10; ++t) {
        const std::string text = poly(deg(rng)) + "/" + poly(deg(rng));
        auto census = analyze_singularities(parse_field(text), Window::square(8));
        int total = census.infinity.order;
        for (const auto& s : census.finite) total += s.order;
        c.expect(total == 2, text + " sums to " + std::to_string(total));
    }
    c.note("10 fields");
    return c.done();
}

Outcome quartic_census() {
    Checker c;
    auto d = decompose(parse_field("z/(z^4-1)"), Window::square(3));
    const int strips = d.count(RegionKind::Strip), halves = d.count(RegionKind::HalfPlane);
    c.expect(strips == 8 && halves == 8,
             "got " + std::to_string(strips) + " strips and " + std::to_string(halves) + " half planes, want 8 and 8");
    return c.done();
}

Outcome exp_skeleton() {
    Checker c;
    auto sk = separatrix_skeleton(parse_field("exp(z)"), Window::square(4));
    c.expect(sk.curves.size() == 3, "curve count " + std::to_string(sk.curves.size()));
    double worst = 0.0;
    std::vector<int> lines;
    for (const auto& cv : sk.curves) {
        const int k = static_cast<int>(std::lround(cv.traj.samples.front().z.imag() / pi));
        lines.push_back(k);
        for (const auto& s : cv.traj.samples) worst = std::max(worst, std::abs(s.z.imag() - k * pi));
    }
    std::sort(lines.begin(), lines.end());
    c.expect(lines == std::vector<int>{-1, 0, 1}, "lines are not Im z = -pi, 0, pi");
    c.expect(worst <= 1e-5, "sup distance " + fmt(worst));
    c.note("sup distance " + fmt(worst));
    return c.done();
}

Outcome isin_centers() {
    Checker c;
    auto h = parse_field("i*sin(z)");
    const Window w = Window::square(7);
    auto rep = admissibility_report(h, separatrix_skeleton(h, w));
    c.expect(rep.returns.size() == 5, "return maps " + std::to_string(rep.returns.size()));
    double worst = 0.0;
    for (const auto& r : rep.returns) {
        c.expect(r.report.has_value(), "first return failed: " + r.error);
        if (r.report) worst = std::max(worst, r.report->max_deviation);
    }
    c.expect(worst <= 1e-6, "identity deviation " + fmt(worst));
    auto d = decompose(h, w);
    int cylinders = 0;
    double r_gap = 0.0;
    for (const auto& reg : d.regions) {
        if (reg.kind != RegionKind::HalfCylinder) continue;
        ++cylinders;
        c.expect(reg.modulus.r.has_value(), "half cylinder without a circumference");
        if (reg.modulus.r) r_gap = std::max(r_gap, std::abs(*reg.modulus.r - 2 * pi));
    }
    c.expect(cylinders == 5, "half cylinders " + std::to_string(cylinders));
    c.expect(r_gap <= 1e-6, "|r - 2pi| " + fmt(r_gap));
    c.note("deviation " + fmt(worst) + ", |r - 2pi| " + fmt(r_gap));
    return c.done();
}

Outcome dictionary_exactness() {
    Checker c;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst_fb = 0.0;
    for (int k = 1; k <= 3; ++k) {
        auto h = parse_field(pole_text(k));
        auto anti = [k](Complex z) { return std::pow(z, k + 1) / double(k + 1); };
        for (int t = 0; t < 20; ++t) {
            PathSpec p;
            for (int j = 0; j < 3; ++j) p.waypoints.emplace_back(u(rng), u(rng));
            const Complex want = anti(p.waypoints.back()) - anti(p.waypoints.front());
            const double err = std::abs(flow_box(h, p).value - want) / std::max(1.0, std::abs(want));
            worst_fb = std::max(worst_fb, err);
        }
    }
    c.expect(worst_fb <= 1e-9, "flow box error " + fmt(worst_fb));

    const char* corpus[] = {"1/z", "1/z^2", "1/z^3", "z/(z^4-1)", "exp(z)", "i*sin(z)"};
    const std::vector<Complex> avoid = {0.0, 1.0, -1.0, Complex(0, 1), Complex(0, -1), pi, -pi};
    double worst_pf = 0.0;
    for (const char* t : corpus) {
        auto h = parse_field(t);
        int n = 0;
        for (Complex z : random_points(100, 7, -3, 3)) {
            bool near = false;
            for (Complex s : avoid) near = near || std::abs(z - s) < 0.05;
            if (near || n == 50) continue;
            ++n;
            worst_pf = std::max(worst_pf, pushforward_residual(h, z));
        }
        c.expect(n == 50, std::string(t) + ": too few probe points");
    }
    c.expect(worst_pf <= 1e-7, "pushforward residual " + fmt(worst_pf));
    c.note("flow box " + fmt(worst_fb) + ", pushforward " + fmt(worst_pf));
    return c.done();
}

Outcome operator_values() {
    Checker c;
    const std::map<std::string, Complex> p{{"a", 1.0}, {"b", 1.0}, {"d", 1.0}, {"e", 1.0}};
    auto X = PlanarField::parse("a*x+d*x*y", "b*y+e*x*y", p);
    auto f = ScalarField::parse("a*log(y)-b*log(x)+d*y-e*x", p);
    ProbeRegion quadrant;
    quadrant.rect = {0.3, 0.3, 3.0, 3.0};
    auto mu = op_c1(f, X, quadrant).mu;
    double worst1 = 0.0;
    for (Complex z : random_points(10, 3, 0.2, 3.0)) {
        const double x = z.real(), y = z.imag();
        worst1 = std::max(worst1, std::abs(mu(x, y) + 1.0 / (x * y)));
    }
    c.expect(worst1 <= 1e-10, "c1 error " + fmt(worst1));

    auto Y = op_c2(ScalarField::parse("x*y"));
    double worst2 = 0.0;
    for (Complex z : random_points(10, 4, -2.0, 2.0)) {
        const double x = z.real(), y = z.imag(), r2 = x * x + y * y;
        const Vec2 v = Y(x, y);
        worst2 = std::max({worst2, std::abs(v.x - y / r2), std::abs(v.y - x / r2)});
    }
    c.expect(worst2 <= 1e-10, "c2 error " + fmt(worst2));
    c.note("c1 " + fmt(worst1) + ", c2 " + fmt(worst2));
    return c.done();
}

Outcome harmonic_commutation() {
    Checker c;
    double worst = 0.0;
    for (const char* V : {"x^2-y^2", "exp(x)*cos(y)"}) {
        auto [A, B] = harmonic_pair(ScalarField::parse(V));
        auto C = commutator(A, B);
        for (Complex z : random_points(20, 11, -2, 2)) {
            if (std::abs(z) < 0.1) continue;
            worst = std::max(worst, C(z.real(), z.imag()).norm());
        }
    }
    c.expect(worst <= 1e-6, "harmonic residual " + fmt(worst));
    auto [P, Q] = harmonic_pair(ScalarField::parse("x^2+y^2"));
    const double off = commutator(P, Q)(1.0, 0.0).norm();
    c.expect(off >= 1e-2, "non-harmonic residual " + fmt(off));
    c.note("harmonic " + fmt(worst) + ", x^2+y^2 " + fmt(off));
    return c.done();
}

Outcome holonomy_verdicts() {
    Checker c;
    struct Case {
        BuiltinField b;
        HolonomyVerdict want;
    };
    std::vector<Case> cases{{linear_saddle(1.0), HolonomyVerdict::DiffeoConsistent},
                            {linear_saddle(2.0), HolonomyVerdict::NonC1},
                            {builtin_field("muller"), HolonomyVerdict::NonC1},
                            {builtin_field("saddle-node"), HolonomyVerdict::NonC1}};
    for (const auto& k : cases) {
        for (int level = 0; level < 4; ++level) {
            auto probe = k.b.input.sectors.at(0);
            probe.in.length *= std::ldexp(1.0, -level);
            auto r = holonomy_map(k.b.input.X, probe.in, probe.out, k.b.input.holonomy);
            c.expect(r.verdict == k.want, k.b.name + " level " + std::to_string(level) + ": " +
                                              holonomy_verdict_name(r.verdict));
        }
    }
    auto sn = admissibility_report(builtin_field("saddle-node").input);
    bool hph = false;
    for (const auto& w : sn.words) hph = hph || w.word == SectorWord::parse("HPH");
    c.expect(hph, "saddle node word HPH not reported");
    c.expect(!sn.admissible(), "saddle node reported admissible");
    c.note("4 fields x 4 levels");
    return c.done();
}

// The pole pattern with its first glued ray pair split into a unit segment
// and a ray, so one finite identification exists.
GluingSpec split_pole_gluing(int k) {
    GluingSpec g = pole_gluing(k);
    auto [a, b] = g.identifications.front();
    auto split = [&g](const std::string& label) {
        for (auto& piece : g.pieces)
            for (auto& bd : piece.boundaries)
                for (std::size_t i = 0; i < bd.segments.size(); ++i) {
                    if (bd.segments[i].label != label) continue;
                    SegmentSpec near = bd.segments[i], far = bd.segments[i];
                    near.label = label + ".near";
                    near.length = 1.0;
                    far.label = label + ".far";
                    const bool outgoing = i + 1 == bd.segments.size();  // ray starting at the vertex
                    bd.segments[i] = outgoing ? near : far;
                    bd.segments.insert(bd.segments.begin() + static_cast<long>(outgoing ? i + 1 : i),
                                       outgoing ? far : near);
                    return;
                }
    };
    split(a);
    split(b);
    g.identifications.front() = {a + ".near", b + ".near"};
    g.identifications.emplace_back(a + ".far", b + ".far");
    return g;
}

Outcome gluing_round_trip() {
    Checker c;
    for (int k = 1; k <= 3; ++k) {
        const std::string tag = "k=" + std::to_string(k);
        const SectorWord want = SectorWord::repeat(Letter::H, 2 * k + 2);
        auto s = build_surface(pole_gluing(k));
        auto words = s.words();
        c.expect(std::count(words.begin(), words.end(), want) == 1, tag + ": word not recovered");
        c.expect(detect_gaps(s).gaps.empty(), tag + ": gaps in the full pattern");

        GluingSpec split = split_pole_gluing(k);
        c.expect(validate_gluing(split).valid(), tag + ": split pattern invalid");
        auto ss = build_surface(split);
        auto sw = ss.words();
        c.expect(std::count(sw.begin(), sw.end(), want) == 1, tag + ": split pattern lost the word");
        c.expect(detect_gaps(ss).gaps.empty(), tag + ": split pattern has gaps");
        split.identifications.erase(split.identifications.begin());
        auto gaps = detect_gaps(build_surface(split));
        c.expect(gaps.gaps.size() == 1, tag + ": " + std::to_string(gaps.gaps.size()) + " gaps after dropping a seam");
    }
    return c.done();
}

Outcome cusp_flow_box() {
    Checker c;
    auto b = builtin_field("cusp-n-m", {{"n", 2}, {"m", 3}});
    c.expect(b.input.flow_box.has_value(), "no flow box candidate");
    c.expect(b.input.flow_box_points.size() == 20, "sample count " + std::to_string(b.input.flow_box_points.size()));
    if (b.input.flow_box) {
        auto check = flow_box_residual(b.input.X, *b.input.flow_box, b.input.flow_box_points);
        c.expect(check.max_residual <= 1e-6, "residual " + fmt(check.max_residual));
        c.note("max residual " + fmt(check.max_residual));
    }
    return c.done();
}

Outcome determinism() {
    Checker c;
    cli::Config cfg;
    cfg.window = Window::square(3);
    auto a = report::dump(cli::cmd_analyze("z/(z^4-1)", cfg).json);
    auto b = report::dump(cli::cmd_analyze("z/(z^4-1)", cfg).json);
    c.expect(a == b, "reports differ");
    c.note(std::to_string(a.size()) + " bytes");
    return c.done();
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"pole words H^(2k+2), k = 1..4", 1, pole_words},
        {"orders on the sphere sum to 2", 5, sphere_degree},
        {"z/(z^4-1) census: 8 strips, 8 half planes", 30, quartic_census},
        {"exp(z) skeleton on Im z = k pi", 10, exp_skeleton},
        {"i sin z centers: identity return, r = 2 pi", 30, isin_centers},
        {"flow box and pushforward exactness", 30, dictionary_exactness},
        {"c1 and c2 operator values", 5, operator_values},
        {"harmonic commutation", 5, harmonic_commutation},
        {"holonomy verdicts and HPH", 60, holonomy_verdicts},
        {"gluing round trip and gaps", 5, gluing_round_trip},
        {"cusp flow box", 5, cusp_flow_box},
        {"analyze determinism", 60, determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& cr = criteria[i];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > cr.budget_s) {
            o.ok = false;
            o.detail += (o.detail.empty() ? "" : "; ") + std::string("over budget ") + fmt(cr.budget_s) + " s";
        }
        failed += !o.ok;
        std::printf("%s %2zu  %-44s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", i + 1, cr.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
