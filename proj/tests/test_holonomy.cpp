#include <cmath>
#include <numbers>

#include "doctest.h"
#include "holoflow/holonomy.hpp"

using namespace holoflow;
using std::numbers::pi;

namespace {

const HolonomyReport& only_sector(const AdmissibilityReport& r) {
    REQUIRE(r.sectors.size() >= 1);
    return r.sectors.front().report;
}

HolonomyReport sector_map(const BuiltinField& b, std::size_t j = 0, double eps_scale = 1.0) {
    auto probe = b.input.sectors.at(j);
    probe.in.length *= eps_scale;
    return holonomy_map(b.input.X, probe.in, probe.out, b.input.holonomy);
}

// The first integral takes the same value at s and at hol(s).
double conservation_gap(const BuiltinField& b, const SectorProbe& p, const HolonomySample& s) {
    const ScalarField& f = *b.first_integral;
    Vec2 a = p.in.at(s.s), c = p.out.at(*s.hol);
    double fa = f(a.x, a.y), fc = f(c.x, c.y);
    return std::abs(fa - fc) / std::max(std::abs(fa), std::abs(fc));
}

}  // namespace

TEST_CASE("transversal geometry") {
    Transversal t{{1, 2}, {0, 3}, 0.5, {}};
    CHECK(t.unit().y == doctest::Approx(1.0));
    CHECK(t.at(0.25).y == doctest::Approx(2.25));
    CHECK(t.param({7, 2.4}) == doctest::Approx(0.4));
    CHECK(t.offset({0.5, 9}) == doctest::Approx(0.5));
    auto g = t.grid(4);
    REQUIRE(g.size() == 4);
    CHECK(g[3] == 0.0625);
}

TEST_CASE("linear saddle holonomy is s to the power lambda") {
    for (double lambda : {1.0, 2.0, 0.5}) {
        CAPTURE(lambda);
        auto b = linear_saddle(lambda);
        auto rep = sector_map(b);
        for (const auto& s : rep.samples) {
            REQUIRE(s.hol);
            CHECK(std::abs(*s.hol - std::pow(s.s, lambda)) < 1e-9 * std::max(1.0, std::pow(s.s, lambda) * 1e3));
        }
        CHECK(rep.verdict == (lambda == 1.0 ? HolonomyVerdict::DiffeoConsistent : HolonomyVerdict::NonC1));
    }
    auto rep = sector_map(linear_saddle(1.0));
    REQUIRE(rep.derivatives[0]);
    CHECK(*rep.derivatives[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(*rep.derivatives[1]) < 1e-6);
}

TEST_CASE("quotient ratios drive the verdict") {
    auto vanish = sector_map(linear_saddle(2.0));
    for (double r : vanish.ratios) CHECK(r == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(vanish.reason.find("vanishes") != std::string::npos);
    auto diverge = sector_map(linear_saddle(0.5));
    for (double r : diverge.ratios) CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(diverge.reason.find("diverges") != std::string::npos);
}

TEST_CASE("symmetric cubic saddle has identity holonomy") {
    auto rep = sector_map(builtin_field("symmetric-cubic"));
    for (const auto& s : rep.samples) {
        REQUIRE(s.hol);
        CHECK(std::abs(*s.hol - s.s) < 1e-7);
    }
    CHECK(rep.verdict == HolonomyVerdict::DiffeoConsistent);
}

TEST_CASE("Muller sector at infinity is not C1") {
    auto b = builtin_field("muller");
    auto rep = sector_map(b);
    CHECK(rep.verdict == HolonomyVerdict::NonC1);
    for (const auto& s : rep.samples) {
        REQUIRE(s.hol);
        CHECK(conservation_gap(b, b.input.sectors[0], s) < 1e-6);
    }
    // hol(s) behaves like 1/sqrt(log 1/s): the quotient roughly doubles.
    for (double r : rep.ratios) CHECK(r > 1.9);
}

TEST_CASE("saddle node sectors are not C1 and the word is HPH") {
    auto b = builtin_field("saddle-node");
    for (std::size_t j = 0; j < 2; ++j) {
        auto rep = sector_map(b, j);
        CHECK(rep.direction == -1);
        CHECK(rep.verdict == HolonomyVerdict::NonC1);
        for (const auto& s : rep.samples) {
            REQUIRE(s.hol);
            // Inverse of hol(s) = exp(lambda (1 - 1/s)).
            CHECK(*s.hol == doctest::Approx(1.0 / (1.0 - std::log(s.s))).epsilon(1e-8));
        }
    }
    auto adm = admissibility_report(b.input);
    CHECK(adm.verdict == ConditionVerdict::Fail);
    REQUIRE(adm.words.size() == 1);
    CHECK(adm.words[0].word == SectorWord::parse("HPH"));
}

TEST_CASE("verdicts are stable over four dyadic transversal lengths") {
    struct Case {
        BuiltinField b;
        HolonomyVerdict want;
    };
    std::vector<Case> cases{{linear_saddle(1.0), HolonomyVerdict::DiffeoConsistent},
                            {linear_saddle(2.0), HolonomyVerdict::NonC1},
                            {builtin_field("muller"), HolonomyVerdict::NonC1},
                            {builtin_field("saddle-node"), HolonomyVerdict::NonC1},
                            {builtin_field("symmetric-cubic"), HolonomyVerdict::DiffeoConsistent}};
    for (const auto& c : cases) {
        CAPTURE(c.b.name);
        for (int level = 0; level < 4; ++level) {
            CAPTURE(level);
            CHECK(sector_map(c.b, 0, std::ldexp(1.0, -level)).verdict == c.want);
        }
    }
}

TEST_CASE("tangent transversals are rejected") {
    auto X = PlanarField::parse("1", "0");
    CHECK_THROWS_AS(holonomy_map(X, {{0, 0}, {1, 0}, 0.1, {}}, {{1, 0}, {0, 1}, 0.1, {}}), HolonomyError);
}

TEST_CASE("failed crossings are reported per sample") {
    // Orbits of the translation never meet a transversal behind them.
    auto X = PlanarField::parse("1", "0");
    auto rep = holonomy_map(X, {{0, 0}, {0, 1}, 0.1, {}}, {{0, 5}, {1, 1}, 0.1, {}}, {.arc_budget = 50});
    CHECK(rep.verdict == HolonomyVerdict::Inconclusive);
    for (const auto& s : rep.samples) {
        CHECK_FALSE(s.hol);
        CHECK_FALSE(s.failure.empty());
    }
}

TEST_CASE("first return maps") {
    SUBCASE("linear center returns by the identity") {
        auto rep = first_return_map(PlanarField::parse("-y", "x"), {1, 0});
        CHECK(rep.max_deviation <= 1e-8);
        CHECK(rep.orbit_length == doctest::Approx(2 * pi).epsilon(1e-9));
        CHECK(rep.map.size() == 9);
    }
    SUBCASE("a focus does not return") {
        CHECK_THROWS_AS(first_return_map(PlanarField::parse("0.1*x-y", "x+0.1*y"), {1, 0}), HolonomyError);
    }
    SUBCASE("a saddle has no periodic orbit") {
        CHECK_THROWS_AS(first_return_map(PlanarField::parse("x", "-y"), {1, 1}), HolonomyError);
    }
    SUBCASE("singular seed") {
        CHECK_THROWS_AS(first_return_map(PlanarField::parse("x", "-y"), {0, 0}), HolonomyError);
    }
}

TEST_CASE("cusp flow box straightens the scaled field") {
    auto b = builtin_field("cusp-n-m");
    REQUIRE(b.input.flow_box);
    REQUIRE(b.input.flow_box_points.size() == 20);
    auto check = flow_box_residual(b.input.X, *b.input.flow_box, b.input.flow_box_points);
    CHECK(check.max_residual <= 1e-6);
    // Psi2 is a first integral and d Psi1(X) = e^x (3 y^3 + 2 x).
    const auto& c = *b.input.flow_box;
    for (Vec2 p : b.input.flow_box_points) {
        Vec2 v = b.input.X(p);
        CHECK(std::abs(c.psi2.gradient(p.x, p.y).dot(v)) < 1e-12 * (1 + v.norm()));
        double expect = std::exp(p.x) * (3 * p.y * p.y * p.y + 2 * p.x);
        CHECK(c.psi1.gradient(p.x, p.y).dot(v) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(admissibility_report(b.input).admissible());
    CHECK_THROWS_AS(builtin_field("cusp-n-m", {{"n", 2.5}}), std::invalid_argument);
}

TEST_CASE("admissibility of complex fields") {
    SUBCASE("simple pole") {
        auto h = parse_field("1/z");
        auto rep = admissibility_report(h, separatrix_skeleton(h, Window::square(2)));
        CHECK(rep.sectors.size() == 4);
        for (const auto& s : rep.sectors) CHECK(s.report.verdict == HolonomyVerdict::DiffeoConsistent);
        REQUIRE(rep.words.size() == 1);
        CHECK(rep.words[0].word == SectorWord::parse("HHHH"));
        CHECK(rep.admissible());
    }
    SUBCASE("double pole") {
        auto h = parse_field("1/z^2");
        auto rep = admissibility_report(h, separatrix_skeleton(h, Window::square(2)));
        CHECK(rep.sectors.size() == 6);
        CHECK(rep.admissible());
    }
    SUBCASE("centers of i sin z") {
        auto h = parse_field("i*sin(z)");
        auto rep = admissibility_report(h, separatrix_skeleton(h, Window::square(7)));
        CHECK(rep.returns.size() == 5);
        for (const auto& r : rep.returns) {
            REQUIRE(r.report);
            CHECK(r.report->max_deviation <= 1e-6);
        }
        CHECK(rep.admissible());
    }
}

TEST_CASE("admissibility verdict combination") {
    auto b = linear_saddle(1.0);
    CHECK(admissibility_report(b.input).admissible());
    b.input.separatrices_finite.reset();
    CHECK(admissibility_report(b.input).verdict == ConditionVerdict::Inconclusive);
    auto nb = linear_saddle(2.0);
    auto rep = admissibility_report(nb.input);
    CHECK(rep.verdict == ConditionVerdict::Fail);
    CHECK(only_sector(rep).verdict == HolonomyVerdict::NonC1);
    nb.input.words.push_back({"origin", SectorWord::parse("HHH"), SectorWord::parse("HHHH"), false});
    CHECK(admissibility_report(nb.input).conditions[3].verdict == ConditionVerdict::Fail);
}

TEST_CASE("builtin catalogue") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        auto b = builtin_field(name);
        CHECK(b.name == name);
        CHECK_FALSE(b.description.empty());
        REQUIRE(b.first_integral);
        // The first integral is constant along the field.
        for (Vec2 p : b.probe.samples()) {
            Vec2 v = b.input.X(p), g = b.first_integral->gradient(p.x, p.y);
            if (!std::isfinite(g.x) || !std::isfinite(g.y)) continue;
            CHECK(std::abs(g.dot(v)) <= 1e-9 * (1 + g.norm() * v.norm()));
        }
    }
    CHECK_THROWS_AS(builtin_field("nope"), std::invalid_argument);
    CHECK_THROWS_AS(builtin_field("muller", {{"a", 1}}), std::invalid_argument);
    auto lv = builtin_field("lotka-volterra", {{"a", 2}});
    CHECK(lv.params.at("a") == 2);
    CHECK(lv.input.X(1, 1).x == doctest::Approx(3));
}
