#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "holoflow/field.hpp"

using namespace holoflow;
using std::numbers::pi;

namespace {

double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Random expression text drawn from the published grammar.
std::string random_text(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    std::uniform_real_distribution<double> num(0.1, 3.0);
    char buf[32];
    switch (pick(rng)) {
        case 0: std::snprintf(buf, sizeof buf, "%.3f", num(rng)); return buf;
        case 1: return "i";
        case 2: return "z";
        case 3: return "(" + random_text(rng, depth - 1) + "+" + random_text(rng, depth - 1) + ")";
        case 4: return "(" + random_text(rng, depth - 1) + "-" + random_text(rng, depth - 1) + ")";
        case 5: return random_text(rng, depth - 1) + "*" + random_text(rng, depth - 1);
        case 6: return "(" + random_text(rng, depth - 1) + ")/(" + random_text(rng, depth - 1) + "+2.5)";
        case 7: {
            static const char* f[] = {"exp", "sin", "cos", "log"};
            std::string arg = random_text(rng, depth - 1);
            if (std::string(f[rng() % 4]) == "log") return "log(" + arg + "+3)";
            return std::string(f[rng() % 3]) + "(" + arg + ")";
        }
        case 8: return "(" + random_text(rng, depth - 1) + ")^" + std::to_string(rng() % 4);
        default: return "(" + random_text(rng, depth - 1) + ")";
    }
}

std::vector<Complex> sample_points(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> pts;
    for (int k = 0; k < n; ++k) pts.emplace_back(u(rng), u(rng));
    return pts;
}

}  // namespace

TEST_CASE("parse and evaluate the corpus fields") {
    auto f = parse_field("1/z^2");
    CHECK(std::abs(evaluate(f, 1.0) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(f.is_rational());

    auto e = parse_field("exp(z)");
    CHECK_FALSE(e.is_rational());
    CHECK(std::abs(evaluate(e, Complex(0.0, pi)) - Complex(-1.0, 0.0)) < 1e-15);

    auto ex3 = parse_field("z/(z^4-1)");
    CHECK(std::abs(evaluate(ex3, 0.0)) == 0.0);
    // Hand arithmetic: 2/(16-1).
    CHECK(std::abs(evaluate(ex3, 2.0) - Complex(2.0 / 15.0, 0.0)) < 1e-15);

    auto s = parse_field("i*sin(z)");
    CHECK(std::abs(evaluate(s, 0.0)) == 0.0);
    CHECK_FALSE(s.is_rational());
}

TEST_CASE("parse errors carry byte offsets") {
    try {
        parse_field("z + * 2");
        FAIL("expected a parse error");
    } catch (const ParseError& err) {
        CHECK(err.offset() == 4);
    }
    try {
        parse_field("z + foo(z)");
        FAIL("expected a parse error");
    } catch (const ParseError& err) {
        CHECK(err.offset() == 4);
        CHECK(std::string(err.what()).find("unknown identifier") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_field("(z+1"), ParseError);
    CHECK_THROWS_AS(parse_field("z^1.5"), ParseError);
    CHECK_THROWS_AS(parse_field(""), ParseError);
    CHECK_THROWS_AS(parse_field("2z"), ParseError);
}

TEST_CASE("evaluation at a pole is reported") {
    auto f = parse_field("1/z");
    CHECK_THROWS_AS(evaluate(f, 0.0), EvalError);
}

TEST_CASE("differentiate examples") {
    auto d3 = differentiate(parse_field("z^3"));
    CHECK(d3.print() == "3*z^2");
    auto de = differentiate(parse_field("exp(z)"));
    CHECK(de.print() == "exp(z)");
    auto dr = differentiate(parse_field("1/z"));
    CHECK(dr.print() == "-1/z^2");
    for (Complex z : sample_points(10, 3)) {
        CHECK(rel_err(evaluate(d3, z), 3.0 * z * z) < 1e-14);
        CHECK(rel_err(evaluate(dr, z), -1.0 / (z * z)) < 1e-14);
    }
}

TEST_CASE("chart at infinity examples") {
    CHECK(chart_at_infinity(parse_field("1")).print("w") == "-w^2");
    CHECK(chart_at_infinity(parse_field("1/z")).print("w") == "-w^3");
    auto g = chart_at_infinity(parse_field("exp(z)"));
    CHECK_FALSE(g.is_rational());
    for (Complex w : sample_points(10, 5)) {
        Complex want = -w * w * std::exp(1.0 / w);
        CHECK(rel_err(g(w), want) < 1e-13);
    }
    // Powers of 1/z: g = -w^(k+2).
    for (int k = 1; k <= 4; ++k) {
        auto gk = chart_at_infinity(parse_field("1/z^" + std::to_string(k)));
        CHECK(gk.print("w") == "-w^" + std::to_string(k + 2));
    }
}

TEST_CASE("rational normal form cancels common roots") {
    auto f = parse_field("(z^2-1)/(z-1)");
    REQUIRE(f.rational());
    CHECK(f.rational()->num.degree() == 1);
    CHECK(f.rational()->den.degree() == 0);
    auto g = parse_field("z/(z^4-1)");
    CHECK(g.rational()->num.degree() == 1);
    CHECK(g.rational()->den.degree() == 4);
}

TEST_CASE("p exp(q) pattern detection") {
    auto p = exp_pattern(parse_field("exp(z)"));
    REQUIRE(p);
    CHECK(p->exponent.num.degree() == 1);
    auto q = exp_pattern(parse_field("z^2*exp(z^3-z)/(z+1)"));
    REQUIRE(q);
    CHECK(q->exponent.num.degree() == 3);
    CHECK_FALSE(exp_pattern(parse_field("i*sin(z)")));
    CHECK_FALSE(exp_pattern(parse_field("exp(z)+exp(2*z)")));
}

TEST_CASE("complex arithmetic identity (a*b)/b = a") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int k = 0; k < 200; ++k) {
        Complex a(u(rng), u(rng)), b(u(rng), u(rng));
        CHECK(std::abs((a * b) / b - a) <= 1e-12 * std::abs(a));
    }
}

TEST_CASE("print-parse round trip on random grammar expressions") {
    std::mt19937 rng(2024);
    auto pts = sample_points(50, 7);
    for (int trial = 0; trial < 300; ++trial) {
        std::string text = random_text(rng, 5);
        auto f = parse_field(text);
        auto g = parse_field(f.print());
        CHECK(f.is_rational() == (text.find("exp") == std::string::npos && text.find("sin") == std::string::npos &&
                                  text.find("cos") == std::string::npos && text.find("log") == std::string::npos));
        for (Complex z : pts) {
            Complex a = f(z), b = g(z);
            if (!std::isfinite(std::abs(a))) continue;
            CHECK_MESSAGE(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)), text);
        }
    }
}

TEST_CASE("chart at infinity twice is the identity") {
    std::mt19937 rng(99);
    const char* fields[] = {"z/(z^4-1)", "1/z^2", "exp(z)", "i*sin(z)", "z^2/(1-3*z)", "(z^3+2*z-1)/(z^2+i)"};
    for (const char* t : fields) {
        auto f = parse_field(t);
        auto gg = chart_at_infinity(chart_at_infinity(f));
        for (Complex z : sample_points(40, rng())) {
            z += Complex(0.3, 0.2);  // away from 0
            Complex a = f(z), b = gg(z);
            CHECK_MESSAGE(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)), t);
        }
    }
}

TEST_CASE("derivative agrees with central differences") {
    std::mt19937 rng(4242);
    auto pts = sample_points(20, 8);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto f = parse_field(random_text(rng, 4));
        auto d = differentiate(f);
        for (Complex z : pts) {
            const double h = 1e-5;
            Complex fd = (f(z + h) - f(z - h)) / (2 * h);
            Complex fd2 = (f(z + h / 2) - f(z - h / 2)) / h;
            Complex exact = d(z);
            if (!std::isfinite(std::abs(fd)) || !std::isfinite(std::abs(exact))) continue;
            // Skip points where the difference quotient itself is not converged (near-singular).
            if (std::abs(fd - fd2) > 1e-8 * std::max(1.0, std::abs(fd))) continue;
            CHECK(std::abs(exact - fd) <= 1e-6 * std::max(1.0, std::abs(exact)));
            ++checked;
        }
    }
    CHECK(checked > 2000);
}
