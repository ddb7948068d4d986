#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "holoflow/dictionary.hpp"
#include "holoflow/trajectory.hpp"

using namespace holoflow;
using std::numbers::pi;

namespace {

double wrap_angle(double a) {
    a = std::fmod(a, 2 * pi);
    return a < 0 ? a + 2 * pi : a;
}

// Distance from z to the nearest of the lines Im z = k pi, k in {-1, 0, 1}.
double distance_to_lines(Complex z) {
    double best = 1e300;
    for (int k = -1; k <= 1; ++k) best = std::min(best, std::abs(z.imag() - k * pi));
    return best;
}

}  // namespace

TEST_CASE("constant field moves at unit speed") {
    auto tr = integrate_real_flow(parse_field("1"), 0.0, 1.0);
    CHECK(std::abs(tr.samples.back().z - 1.0) < 1e-12);
    CHECK(tr.verdict == Verdict::CompleteForward);
    CHECK(std::abs(tr.gx_length - 1.0) < 1e-12);

    auto back = integrate_real_flow(parse_field("1"), 0.0, -2.0);
    CHECK(std::abs(back.samples.back().z + 2.0) < 1e-12);
    CHECK(back.verdict == Verdict::CompleteBackward);
}

TEST_CASE("rotation field closes with period two pi") {
    auto tr = integrate_real_flow(parse_field("i*z"), 1.0, 20.0);
    REQUIRE(tr.period);
    CHECK(std::abs(*tr.period - 2 * pi) < 1e-6);
    CHECK(tr.verdict == Verdict::CompleteForward);
    for (const auto& s : tr.samples) CHECK(std::abs(std::abs(s.z) - 1.0) < 1e-8);
}

TEST_CASE("simple pole is reached in finite time") {
    // z^2 = 1 + 2 tau along X = (1/z) d/dz, so z = 0 at tau = -1/2.
    auto h = parse_field("1/z");
    FlowOptions opt;
    opt.poles = {0.0};
    auto bw = integrate_real_flow(h, 1.0, -5.0, 0.0, opt);
    CHECK(bw.verdict == Verdict::HitsSingularity);
    REQUIRE(bw.hit_point);
    CHECK(std::abs(*bw.hit_point) < 1e-12);
    CHECK(std::abs(bw.samples.back().tau + 0.5) < 1e-6);

    // Rotating by pi reverses time.
    auto fw = integrate_real_flow(h, 1.0, 5.0, pi, opt);
    CHECK(fw.verdict == Verdict::HitsSingularity);
    CHECK(std::abs(fw.samples.back().tau - 0.5) < 1e-6);

    // Without the pole list the reversal across the pole catches it.
    auto bare = integrate_real_flow(h, 1.0, -5.0);
    CHECK(bare.verdict == Verdict::HitsSingularity);
    CHECK(std::abs(bare.samples.back().tau + 0.5) < 1e-6);
}

TEST_CASE("escape to infinity in finite time") {
    // x' = e^x blows up at tau = e^{-x0}.
    auto tr = integrate_real_flow(parse_field("exp(z)"), 0.0, 5.0);
    CHECK(tr.verdict == Verdict::EscapesFiniteTime);
    CHECK(std::abs(tr.samples.back().tau - 1.0) < 1e-6);
    // z' = z grows but never escapes in finite time.
    auto lin = integrate_real_flow(parse_field("z"), 1.0, 12.0);
    CHECK(lin.verdict == Verdict::CompleteForward);
}

TEST_CASE("window exit truncates") {
    FlowOptions opt;
    opt.window = Window::square(1);
    auto tr = integrate_real_flow(parse_field("1"), 0.0, 5.0, 0.0, opt);
    CHECK(tr.verdict == Verdict::WindowTruncated);
    CHECK(std::abs(tr.samples.back().z - 1.0) < 1e-9);
}

TEST_CASE("zero capture counts as complete") {
    FlowOptions opt;
    opt.zeros = {0.0};
    auto tr = integrate_real_flow(parse_field("-z"), 1.0, 100.0, 0.0, opt);
    CHECK(tr.verdict == Verdict::CompleteForward);
    CHECK(tr.tends_to_zero);
    // Reaching |z| = 1e-6 from 1 along z' = -z takes log(1e6).
    CHECK(std::abs(tr.samples.back().tau - std::log(1e6)) < 1e-3);
}

TEST_CASE("separatrices of a simple pole") {
    auto h = parse_field("1/z");
    auto sing = analyze_point(h, 0.0);
    SeparatrixOptions opt;
    opt.tau_budget = 2.0;
    auto seps = separatrices_from(h, sing, opt);
    REQUIRE(seps.size() == 4);
    std::vector<double> angles;
    for (const auto& t : seps) {
        REQUIRE(t.samples.size() > 2);
        CHECK(t.samples.front().z == Complex{});
        CHECK(t.samples.front().tau == 0.0);
        angles.push_back(wrap_angle(std::arg(t.samples.back().z)));
        CHECK(std::abs(std::imag(t.samples.back().z * t.samples.back().z)) < 1e-8);
    }
    std::sort(angles.begin(), angles.end());
    for (int k = 0; k < 4; ++k) {
        double d = std::abs(angles[k] - k * pi / 2);
        CHECK(std::min(d, 2 * pi - d) < 1e-8);
    }
}

TEST_CASE("separatrix counts") {
    for (int k = 1; k <= 4; ++k) {
        auto h = parse_field("1/z^" + std::to_string(k));
        SeparatrixOptions opt;
        opt.tau_budget = 1.0;
        CHECK(separatrices_from(h, analyze_point(h, 0.0), opt).size() == 2u * k + 2);
    }
    auto h = parse_field("z/(z^4-1)");
    SeparatrixOptions opt;
    opt.tau_budget = 5.0;
    CHECK(separatrices_from(h, analyze_point(h, 1.0), opt).size() == 4);

    auto launches = separatrix_launches(parse_field("1/z^2"), 0.0, 2, 0.0, 1e-4);
    REQUIRE(launches.size() == 6);
    for (const auto& l : launches) {
        CHECK(std::abs(std::abs(l.point) - 1e-4) < 1e-12);
        // Psi = z^3/3: the launch sits on Im Psi = 0 at distance Re Psi.
        Complex psi = std::pow(l.point, 3) / 3.0;
        CHECK(std::abs(psi.imag()) < 1e-18);
        CHECK(std::abs(l.tau_offset - std::abs(psi.real())) < 1e-18);
        CHECK(l.direction == (psi.real() > 0 ? 1 : -1));
    }
}

TEST_CASE("skeletons of the corpus") {
    SUBCASE("no poles, no skeleton") {
        auto sk = separatrix_skeleton(parse_field("1"), Window::square(2));
        CHECK(sk.curves.empty());
        auto center = separatrix_skeleton(parse_field("i*z"), Window::square(2));
        CHECK(center.curves.empty());
        CHECK(center.sweep.periodic == center.sweep.seeds);
        CHECK(center.sweep.complete == center.sweep.seeds);
    }
    SUBCASE("four poles, sixteen rays") {
        auto sk = separatrix_skeleton(parse_field("z/(z^4-1)"), Window::square(4));
        CHECK(sk.curves.size() == 16);
        CHECK_FALSE(sk.heuristic);
        int to_zero = 0;
        for (const auto& c : sk.curves) {
            CHECK(c.origin == "pole");
            CHECK(c.start_vertex >= 0);
            if (c.end_vertex >= 0) {
                ++to_zero;
                CHECK(c.traj.tends_to_zero);
            }
            const auto& t = c.traj;
            CHECK(std::abs(t.gx_length - std::abs(t.elapsed())) <= 1e-6 * std::abs(t.elapsed()));
        }
        CHECK(to_zero == 4);
        CHECK(sk.sweep.unexplained_incomplete == 0);
    }
    SUBCASE("exponential: the lines Im z = k pi") {
        auto sk = separatrix_skeleton(parse_field("exp(z)"), Window::square(4));
        CHECK(sk.heuristic);
        REQUIRE(sk.curves.size() == 3);
        std::vector<double> heights;
        for (const auto& c : sk.curves) {
            double worst = 0.0;
            for (const auto& s : c.traj.samples) worst = std::max(worst, distance_to_lines(s.z));
            CHECK(worst < 1e-5);
            heights.push_back(c.traj.samples.front().z.imag());
            CHECK(std::abs(c.traj.elapsed()) > 0.0);
        }
        std::sort(heights.begin(), heights.end());
        for (int k = 0; k < 3; ++k) CHECK(std::abs(heights[k] - (k - 1) * pi) < 1e-5);
    }
}

TEST_CASE("incompleteness sweep") {
    SUBCASE("rational fields: finitely many incomplete trajectories") {
        const char* fields[] = {"1/z", "1/z^2", "z/(z^4-1)", "z^2/(1-3*z)"};
        for (const char* f : fields)
            for (double theta : {0.0, pi / 4, pi / 2}) {
                SkeletonOptions opt;
                opt.theta = theta;
                auto sk = separatrix_skeleton(parse_field(f), Window::square(3), opt);
                CHECK_MESSAGE(sk.sweep.unexplained_incomplete == 0, f, " theta ", theta);
                CHECK(sk.sweep.witnesses.empty());
            }
    }
    SUBCASE("exponential: a witness on every line in every column") {
        auto sk = separatrix_skeleton(parse_field("exp(z)"), Window::square(4));
        const int n = static_cast<int>(sk.sweep.column_witnesses.size());
        REQUIRE(n == 50);
        // Left columns need more than the sweep budget to escape (time e^{-x}).
        for (int i = 0; i < n; ++i) {
            double x = -4.0 + (i + 0.5) * 8.0 / n;
            if (std::exp(-x) < SkeletonOptions{}.sweep_tau / 3) CHECK(sk.sweep.column_witnesses[i] == 3);
        }
        for (Complex w : sk.sweep.witnesses) CHECK(distance_to_lines(w) < 1e-9);
    }
}

TEST_CASE("flat-metric lengths") {
    CHECK(std::abs(gx_length(parse_field("1"), {0.0, 3.0}) - 3.0) < 1e-12);
    // |h| = 1 on the unit circle; a fine polygon converges quadratically.
    auto circle = PathSpec::circle(0.0, 1.0, 4096).waypoints;
    CHECK(std::abs(gx_length(parse_field("i*z"), circle) - 2 * pi) < 1e-6);
    auto orbit = integrate_real_flow(parse_field("i*z"), 1.0, 2 * pi, 0.0, {.detect_period = false});
    CHECK(std::abs(orbit.gx_length - 2 * pi) < 1e-8);

    const char* corpus[] = {"1", "z", "1/z", "1/z^2", "z/(z^4-1)", "z^2/(1-3*z)", "exp(z)", "i*sin(z)", "i*z"};
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const char* f : corpus) {
        auto h = parse_field(f);
        for (int trial = 0; trial < 3; ++trial) {
            Complex z0(u(rng), u(rng));
            FlowOptions opt;
            opt.window = Window::square(3);
            auto tr = integrate_real_flow(h, z0, 2.0, u(rng), opt);
            double dt = std::abs(tr.elapsed());
            if (dt == 0.0) continue;
            CHECK_MESSAGE(std::abs(tr.gx_length - dt) <= 1e-6 * dt, f);
        }
    }
}

TEST_CASE("periods of omega") {
    auto c = period_around(parse_field("i*z"), PathSpec::circle(0.0, 1.0));
    CHECK(std::abs(c.value - 2 * pi) < 1e-9);
    CHECK(c.real);
    auto z = period_around(parse_field("1"), PathSpec::circle(0.3, 2.0));
    CHECK(z.value == Complex{});
    auto node = period_around(parse_field("z/(z^4-1)"), PathSpec::circle(0.0, 0.5));
    CHECK(std::abs(node.value - Complex(0, -2 * pi)) < 1e-9);
    CHECK(node.imaginary);
}

TEST_CASE("rotating by pi mirrors time") {
    const char* corpus[] = {"z/(z^4-1)", "exp(z)", "i*sin(z)", "z^2/(1-3*z)"};
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (const char* f : corpus) {
        auto h = parse_field(f);
        for (int trial = 0; trial < 4; ++trial) {
            Complex z0(u(rng), u(rng));
            double theta = u(rng);
            for (double t : {0.3, 0.7}) {
                FlowOptions opt;
                opt.detect_period = false;
                auto a = integrate_real_flow(h, z0, t, theta + pi, opt);
                auto b = integrate_real_flow(h, z0, -t, theta, opt);
                if (a.verdict != Verdict::CompleteForward || b.verdict != Verdict::CompleteBackward) continue;
                CHECK_MESSAGE(std::abs(a.samples.back().z - b.samples.back().z) < 1e-7, f);
            }
        }
    }
}

TEST_CASE("flow box straightens the real flow") {
    const char* corpus[] = {"z/(z^4-1)", "exp(z)", "i*sin(z)", "1/z^2", "z+1"};
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-1.3, 1.3);
    for (const char* f : corpus) {
        auto h = parse_field(f);
        for (int trial = 0; trial < 3; ++trial) {
            Complex z0(u(rng), u(rng));
            FlowOptions opt;
            opt.detect_period = false;
            opt.window = Window::square(3);
            auto tr = integrate_real_flow(h, z0, 1.0, 0.0, opt);
            if (tr.samples.size() < 3 || is_incomplete(tr.verdict)) continue;
            auto psi = flow_box(h, PathSpec(tr.polyline())).value;
            CHECK_MESSAGE(std::abs(psi - tr.elapsed()) < 1e-6, f);
        }
    }
}

TEST_CASE("isochronous centers of i sin z") {
    auto h = parse_field("i*sin(z)");
    for (int k = -2; k <= 2; ++k) {
        auto s = analyze_point(h, k * pi);
        REQUIRE(s.lambda);
        double expected = std::abs(2 * pi / *s.lambda);
        auto tr = integrate_real_flow(h, k * pi + 0.01, 50.0);
        REQUIRE(tr.period);
        CHECK(std::abs(*tr.period - expected) < 1e-6);
        CHECK(std::abs(tr.samples.back().z - (k * pi + 0.01)) < 1e-6);
    }
}

TEST_CASE("winding numbers") {
    auto loop = PathSpec::circle(0.0, 1.0).waypoints;
    CHECK(winding_number(loop, 0.0) == 1);
    CHECK(winding_number(loop, 2.0) == 0);
    std::reverse(loop.begin(), loop.end());
    CHECK(winding_number(loop, 0.3) == -1);
}
