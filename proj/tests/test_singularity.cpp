#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "holoflow/singularity.hpp"

using namespace holoflow;
using std::numbers::pi;

namespace {

// Oracle: plain bisection for real roots of sin on [a, b].
double bisect_sin(double a, double b) {
    for (int k = 0; k < 200; ++k) {
        double m = 0.5 * (a + b);
        if ((std::sin(a) < 0) == (std::sin(m) < 0)) a = m;
        else b = m;
    }
    return 0.5 * (a + b);
}

const Singularity* find_at(const std::vector<Singularity>& v, Complex z, double tol = 1e-8) {
    for (const auto& s : v)
        if (s.location && std::abs(*s.location - z) < tol) return &s;
    return nullptr;
}

}  // namespace

TEST_CASE("sector words compare cyclically") {
    CHECK(SectorWord::parse("HPH") == SectorWord::parse("HHP"));
    CHECK(SectorWord::parse("EEP") == SectorWord::parse("PEE"));
    CHECK_FALSE(SectorWord::parse("HHP") == SectorWord::parse("HPP"));
    CHECK(SectorWord::parse("Ent Ent").str() == "EntEnt");
    CHECK(SectorWord::parse("H^6") == SectorWord::repeat(Letter::H, 6));
    CHECK(SectorWord::parse("E\xC2\xB7P").size() == 2);
    CHECK(SectorWord::parse("node").tag() == "node");
    CHECK_THROWS(SectorWord::parse("HX"));

    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Letter> l(1 + rng() % 8);
        for (auto& x : l) x = static_cast<Letter>(rng() % 5);
        SectorWord w(l);
        std::vector<Letter> rot(l);
        std::rotate(rot.begin(), rot.begin() + rng() % l.size(), rot.end());
        CHECK(w == SectorWord(rot));
        CHECK(SectorWord::parse(w.str()) == w);
    }
}

TEST_CASE("locate singularities of rational fields") {
    auto loc = locate_singularities(parse_field("z/(z^4-1)"), Window::square(2));
    CHECK(loc.warnings.empty());
    REQUIRE(loc.points.size() == 5);
    auto z0 = find_at(loc.points, 0.0);
    REQUIRE(z0);
    CHECK(z0->kind == SingularityKind::Zero);
    for (Complex p : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)}) {
        auto s = find_at(loc.points, p, 1e-12);
        REQUIRE(s);
        CHECK(s->kind == SingularityKind::Pole);
        CHECK(s->order == -1);
    }
    CHECK(locate_singularities(parse_field("1"), Window::square(2)).points.empty());
    // Roots outside the window are not reported.
    CHECK(locate_singularities(parse_field("z/(z^4-1)"), Window{-0.5, -0.5, 0.5, 0.5}).points.size() == 1);
    CHECK_THROWS(locate_singularities(parse_field("0"), Window::square(1)));
}

TEST_CASE("locate zeros of i sin z by grid scan") {
    auto loc = locate_singularities(parse_field("i*sin(z)"), Window{-7, -1, 7, 1});
    CHECK(loc.warnings.empty());
    REQUIRE(loc.points.size() == 5);
    double oracle[5] = {bisect_sin(-7, -5), bisect_sin(-4, -2), bisect_sin(-1, 1), bisect_sin(2, 4), bisect_sin(5, 7)};
    for (int k = 0; k < 5; ++k) {
        CHECK(std::abs(*loc.points[k].location - Complex(oracle[k], 0.0)) < 1e-12);
        CHECK(loc.points[k].kind == SingularityKind::Zero);
        CHECK(loc.points[k].order == 1);
        CHECK(loc.points[k].method == "grid-newton");
    }
}

TEST_CASE("grid scan finds poles and multiple zeros") {
    auto loc = locate_singularities(parse_field("z^2*exp(z)/(z-1)"), Window{-2, -1.3, 2.2, 1.1});
    REQUIRE(loc.points.size() == 2);
    CHECK(std::abs(*loc.points[0].location) < 1e-6);
    CHECK(loc.points[0].order == 2);
    CHECK(std::abs(*loc.points[1].location - 1.0) < 1e-10);
    CHECK(loc.points[1].order == -1);
}

TEST_CASE("order of zeros and poles") {
    CHECK(order_of(parse_field("1/z^2"), 0.0) == -2);
    CHECK(order_of(parse_field("z"), 0.0) == 1);
    CHECK(order_of(parse_field("z^2/(1-3*z)"), 0.0) == 2);
    CHECK(order_of(parse_field("z+1"), 0.0) == 0);
    // A neighbor closer than r0 forces a smaller circle.
    ContourOptions opt;
    opt.r0 = 0.5;
    opt.neighbors = {0.2};
    CHECK(order_of(parse_field("z*(z-0.2)"), 0.0, opt) == 1);
}

TEST_CASE("residue invariant and lambda") {
    auto c = parse_field("i*z");
    Complex r = residue_invariant(c, 0.0);
    CHECK(std::abs(r - Complex(0, -1)) < 1e-12);
    CHECK(std::abs(*lambda_from(1, r) - Complex(0, 1)) < 1e-12);
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(residue_invariant(parse_field("1/z^" + std::to_string(k)), 0.0)) < 1e-14);
    Complex r2 = residue_invariant(parse_field("z^2/(1-3*z)"), 0.0);
    CHECK(std::abs(r2 + 3.0) < 1e-10);
    CHECK(std::abs(*lambda_from(2, r2) - 3.0) < 1e-10);
    CHECK_FALSE(lambda_from(-2, 0.0));
}

TEST_CASE("contour invariants are stable under radius halving") {
    struct Case {
        const char* h;
        Complex z;
        Window w;
    };
    Case cases[] = {{"z/(z^4-1)", 0.0, Window::square(2)}, {"z/(z^4-1)", 1.0, Window::square(2)},
                    {"1/z^3", 0.0, Window::square(1)},    {"z^2/(1-3*z)", 0.0, Window::square(1)},
                    {"i*sin(z)", pi, Window::square(1)},   {"z^3/(1-(1+i)*z^2)", 0.0, Window::square(1)}};
    for (const auto& cs : cases) {
        auto h = parse_field(cs.h);
        ContourOptions a, b;
        b.r0 = a.r0 / 2;
        CHECK(order_of(h, cs.z, a) == order_of(h, cs.z, b));
        CHECK_MESSAGE(std::abs(residue_invariant(h, cs.z, a) - residue_invariant(h, cs.z, b)) <= 1e-8, cs.h);
    }
}

TEST_CASE("classification against the normal-form table") {
    auto word = [](const char* h, Complex z) { return analyze_point(parse_field(h), z).word; };
    CHECK(word("1/z^2", 0.0).str() == "HHHHHH");
    CHECK(word("i*z", 0.0).str() == "C");
    CHECK(word("(1+i)*z", 0.0).str() == "P");
    CHECK(word("-z", 0.0).tag() == "node");
    CHECK(word("z^2/(1-3*z)", 0.0).str() == "EE");
    CHECK(word("z^2/(1-(1+i)*z)", 0.0) == SectorWord::parse("EEP"));
    CHECK(word("z^3/(1-2*z^2)", 0.0).str() == "EEEE");
    CHECK(word("z^2", 0.0).str() == "EE");
    CHECK(word("z+1", 0.0).str() == "HH");
    for (int k = 1; k <= 5; ++k) CHECK(word(("1/z^" + std::to_string(k)).c_str(), 0.0).size() == 2u * k + 2);

    // Lambda reported for the corpus zero of z/(z^4-1).
    auto s = analyze_point(parse_field("z/(z^4-1)"), 0.0);
    REQUIRE(s.lambda);
    CHECK(std::abs(*s.lambda + 1.0) < 1e-9);
    CHECK(s.word.tag() == "node");
}

TEST_CASE("lambda gates") {
    CHECK(is_purely_imaginary(Complex(1e-10, 1.0)));
    CHECK_FALSE(is_purely_imaginary(Complex(1e-8, 1.0)));
    CHECK(is_real(Complex(2.0, 1e-10)));
    CHECK_FALSE(is_real(Complex(2.0, 1e-8)));
}

TEST_CASE("words at infinity") {
    CHECK(word_at_infinity(parse_field("1")).str() == "EE");
    CHECK(word_at_infinity(parse_field("exp(z)")).str() == "EntEnt");
    CHECK(word_at_infinity(parse_field("z^2*exp(z^3-z)/(z+1)")) == SectorWord::repeat(Letter::Ent, 6));
    CHECK(word_at_infinity(parse_field("i*sin(z)")).tag() == "unclassified-essential");
    // exp(1/z) is holomorphic at infinity: chart -w^2 e^w.
    CHECK(word_at_infinity(parse_field("exp(1/z)")).str() == "EE");

    // z/(z^4-1): chart -w^5/(1-w^4), order 5, residue 1, lambda -1.
    auto inf = analyze_infinity(parse_field("z/(z^4-1)"));
    CHECK(inf.at_infinity());
    CHECK(inf.order == 5);
    CHECK(std::abs(inf.residue - 1.0) < 1e-10);
    CHECK(inf.word == SectorWord::repeat(Letter::E, 8));
    for (int k = 1; k <= 4; ++k) CHECK(word_at_infinity(parse_field("1/z^" + std::to_string(k))).size() == 2u * k + 2);
}

TEST_CASE("orders on the sphere sum to two for rational fields") {
    const char* corpus[] = {"1", "z", "1/z", "1/z^2", "1/z^5", "z/(z^4-1)", "z^2/(1-3*z)", "(z^3+2*z-1)/(z^2+i)",
                            "i*z", "z^3/(1-(1+i)*z^2)"};
    for (const char* t : corpus) {
        auto h = parse_field(t);
        auto census = analyze_singularities(h, Window::square(50));
        int total = census.infinity.order;
        for (const auto& s : census.finite) total += s.order;
        CHECK_MESSAGE(total == 2, t);
        CHECK_MESSAGE(census.warnings.empty(), t);
    }
}

TEST_CASE("corpus census for z/(z^4-1)") {
    auto census = analyze_singularities(parse_field("z/(z^4-1)"), Window::square(2));
    REQUIRE(census.finite.size() == 5);
    for (const auto& s : census.finite) {
        if (std::abs(*s.location) < 1e-9) {
            CHECK(s.order == 1);
            CHECK(std::abs(s.residue + 1.0) < 1e-10);
        } else {
            CHECK(s.order == -1);
            CHECK(s.residue == Complex{});
            CHECK(s.word.str() == "HHHH");
        }
        CHECK(s.method == "rational-roots");
    }
}
