#include <cmath>
#include <numbers>

#include "doctest.h"
#include "holoflow/commands.hpp"

using namespace holoflow;
using namespace holoflow::cli;
using std::numbers::pi;

namespace {

Config small_config() {
    Config c;
    c.grid = 200;
    return c;
}

int census(const Json& j, const char* kind) { return j.at("regions").at("census").at(kind).get<int>(); }

double as_double(const Json& v) { return v.get<double>(); }

}  // namespace

TEST_CASE("argument parsers") {
    Window w = parse_window("-1,-2,3,4");
    CHECK(w.x0 == -1);
    CHECK(w.y1 == 4);
    CHECK_THROWS_AS(parse_window("1,2,3"), UsageError);
    CHECK_THROWS_AS(parse_window("1,1,0,0"), UsageError);
    CHECK_THROWS_AS(parse_window("a,b,c,d"), UsageError);

    CHECK(parse_point(" 1.5, -2") == Complex(1.5, -2));
    CHECK_THROWS_AS(parse_point("1"), UsageError);
    CHECK_THROWS_AS(parse_point("1,2x"), UsageError);

    CHECK_THROWS_AS(parse_path("1,0"), UsageError);
    CHECK_NOTHROW(parse_path("1,0 -> 2,0 -> 2,1"));

    auto p = parse_params({"a=1", "lambda=0.5"});
    CHECK(p.at("lambda") == 0.5);
    CHECK_THROWS_AS(parse_params({"a"}), UsageError);
    CHECK_THROWS_AS(parse_params({"a=x"}), UsageError);
}

TEST_CASE("config layering and errors") {
    Config c;
    apply_config(Json::parse(R"({"tol": 1e-9, "window": [-1, -1, 1, 1], "grid": 50})"), c);
    CHECK(c.tol == 1e-9);
    CHECK(c.window.x1 == 1);
    CHECK(c.grid == 50);
    CHECK(c.seed_grid == 50);  // untouched

    auto bad = [](const char* text) {
        Config d;
        CHECK_THROWS_AS(apply_config(Json::parse(text), d), UsageError);
    };
    bad(R"({"tol": -1})");
    bad(R"({"tol": "small"})");
    bad(R"({"window": [0, 0, 1]})");
    bad(R"({"window": [1, 1, 0, 0]})");
    bad(R"({"grid": 2.5})");
    bad(R"({"admissibility": 1})");
    bad(R"({"unknown_key": 1})");
    bad(R"([1, 2])");
    CHECK_THROWS_AS(load_config("/nonexistent/holoflow.json"), UsageError);

    Json e = c.echo();
    CHECK(e.at("tol") == 1e-9);
    Config round;
    apply_config(e, round);
    CHECK(round.echo() == e);
}

TEST_CASE("analyze 1/z^2: one double pole with six hyperbolic sectors") {
    auto o = cmd_analyze("1/z^2", small_config());
    CHECK(o.exit_code == kExitOk);
    const Json& j = o.json;
    CHECK(j.at("schema") == report::kReportSchema);
    CHECK(j.at("field").at("text") == "1/z^2");
    int poles = 0;
    for (const auto& s : j.at("singularities")) {
        if (s.at("kind") == "pole") {
            ++poles;
            CHECK(s.at("order") == -2);
            CHECK(s.at("word") == "HHHHHH");
        }
    }
    CHECK(poles == 1);
    CHECK(census(j, "half-plane") == 6);
    for (const auto& st : j.at("stages")) CHECK(st.at("status") == "ok");
}

TEST_CASE("analyze z: a node with an empty skeleton") {
    auto o = cmd_analyze("z", small_config());
    CHECK(o.exit_code == kExitOk);
    const Json& j = o.json;
    const Json& zero = j.at("singularities").at(0);
    CHECK(zero.at("kind") == "zero");
    CHECK(as_double(zero.at("lambda").at(0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(as_double(zero.at("lambda").at(1))) < 1e-10);
    CHECK(j.at("skeleton").at("curve_count") == 0);
    CHECK(j.at("tags") == Json::array({"node"}));
}

TEST_CASE("analyze exp(z): horizontal skeleton lines and half planes") {
    Config c = small_config();
    c.window = Window::square(4);
    auto o = cmd_analyze("exp(z)", c);
    CHECK(o.exit_code == kExitOk);
    const Json& j = o.json;
    const Json& curves = j.at("skeleton").at("curves");
    CHECK(curves.size() >= 3);
    for (const auto& cv : curves) {
        double y0 = as_double(cv.at("first").at(1)), y1 = as_double(cv.at("last").at(1));
        const double k = std::round(y0 / pi);
        CHECK(std::abs(y0 - k * pi) < 1e-5);
        CHECK(std::abs(y1 - k * pi) < 1e-5);
    }
    CHECK(census(j, "half-plane") == 4);
    CHECK(census(j, "strip") == 0);
    bool essential = false;
    for (const auto& t : j.at("tags")) essential |= t == "essential-at-infinity";
    CHECK(essential);
}

TEST_CASE("analyze is deterministic and draws an SVG") {
    Config c = small_config();
    auto a = cmd_analyze("1/z", c, true);
    auto b = cmd_analyze("1/z", c, true);
    CHECK(report::dump(a.json) == report::dump(b.json));
    REQUIRE(a.svg);
    CHECK(*a.svg == *b.svg);
    CHECK(a.svg->find("<svg") == 0);
    CHECK(a.svg->find("id=\"separatrices\"") != std::string::npos);
    CHECK(a.svg->find("stroke=\"red\"") != std::string::npos);
}

TEST_CASE("analyze rejects unparsable fields") {
    CHECK_THROWS_AS(cmd_analyze("1/(z", small_config()), UsageError);
    CHECK_THROWS_AS(cmd_trace("z", {1, 0}, 0.0, small_config()), UsageError);
}

TEST_CASE("trace follows a circle of i*z") {
    auto o = cmd_trace("i*z", {1, 0}, 2 * pi, small_config(), true);
    CHECK(o.exit_code == kExitOk);
    const Json& t = o.json.at("trajectory");
    for (const auto& s : t.at("samples")) {
        double x = as_double(s.at("z").at(0)), y = as_double(s.at("z").at(1));
        CHECK(std::hypot(x, y) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(o.svg);
}

TEST_CASE("glue: sphere pattern, saddle node hole, nothing glued") {
    auto sphere = cmd_glue(std::nullopt, "pole:1", {});
    CHECK(sphere.exit_code == kExitOk);
    CHECK(sphere.json.at("words").at(0) == "HHHH");
    CHECK(sphere.json.at("surface").at("gaps").empty());
    CHECK(sphere.json.at("surface").at("unglued").empty());

    auto sn = cmd_glue(std::nullopt, "saddle-node", {}, true);
    CHECK(sn.json.at("words").at(0) == "HPH");
    const Json& gaps = sn.json.at("surface").at("gaps");
    REQUIRE(gaps.size() == 1);
    CHECK(gaps.at(0).at("hint") == "conformal hole");
    CHECK(sn.svg);

    Json spec = sphere.json.at("spec");
    spec["identifications"] = Json::array();
    auto loose = cmd_glue(report::dump(spec), std::nullopt, {});
    CHECK(loose.exit_code == kExitOk);
    CHECK(loose.json.at("surface").at("unglued").size() == 8);

    // Every pole pattern round-trips through the JSON format.
    for (int k = 1; k <= 3; ++k) {
        auto a = cmd_glue(std::nullopt, "pole:" + std::to_string(k), {});
        auto b = cmd_glue(report::dump(a.json.at("spec")), std::nullopt, {});
        CHECK(a.json.at("words") == b.json.at("words"));
        CHECK(a.json.at("words").at(0).get<std::string>() == std::string(2 * k + 2, 'H'));
    }
}

TEST_CASE("glue: schema errors carry JSON pointers") {
    auto o = cmd_glue(R"({"schema": "holoflow.gluing/1", "pieces": [{"id": "A", "kind": "torus", "boundaries": []}],
                         "identifications": [["x", 3]]})",
                      std::nullopt, {});
    CHECK(o.exit_code == kExitUsage);
    std::vector<std::string> pointers;
    for (const auto& e : o.json.at("schema_errors")) pointers.push_back(e.at("pointer"));
    CHECK(pointers == std::vector<std::string>{"/pieces/0/kind", "/identifications/0"});

    CHECK(cmd_glue("{not json", std::nullopt, {}).exit_code == kExitUsage);

    // Schema-valid but a dangling label: the validator reports it.
    Json spec = cmd_glue(std::nullopt, "pole:1", {}).json.at("spec");
    spec["identifications"].push_back({"H0.in", "nowhere"});
    auto v = cmd_glue(report::dump(spec), std::nullopt, {});
    CHECK(v.exit_code == kExitUsage);
    CHECK_FALSE(v.json.at("validation").at("valid").get<bool>());

    CHECK_THROWS_AS(cmd_glue(std::nullopt, "pole:x", {}), UsageError);
    CHECK_THROWS_AS(cmd_glue(std::nullopt, "ring", {}), UsageError);
    CHECK_THROWS_AS(cmd_glue(std::nullopt, std::nullopt, {}), UsageError);
}

TEST_CASE("dictionary: flow box of 1/z along [1, 2]") {
    DictionaryArgs a;
    a.op = "flowbox";
    a.h = "1/z";
    a.path = "1,0 -> 2,0";
    auto o = cmd_dictionary(a, {});
    CHECK(o.exit_code == kExitOk);
    CHECK(as_double(o.json.at("result").at("value").at(0)) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(std::abs(as_double(o.json.at("result").at("value").at(1))) < 1e-12);
}

TEST_CASE("dictionary: c1 of the Lotka-Volterra integral is -1/(xy)") {
    DictionaryArgs a;
    a.op = "c1";
    a.f = "a*log(y)-b*log(x)+d*y-e*x";
    a.X = "lotka-volterra";
    auto o = cmd_dictionary(a, {});
    CHECK(o.exit_code == kExitOk);
    const Json& mu = o.json.at("result").at("mu");
    CHECK(mu.size() >= 10);
    for (const auto& row : mu) {
        double x = as_double(row.at(0)), y = as_double(row.at(1)), m = as_double(row.at(2));
        CHECK(x > 0);
        CHECK(y > 0);
        // the table is rounded to 12 significant digits
        CHECK(m == doctest::Approx(-1.0 / (x * y)).epsilon(1e-10));
    }
}

TEST_CASE("dictionary: harmonic pair of x^2 - y^2 commutes") {
    DictionaryArgs a;
    a.op = "harmonic";
    a.V = "x^2-y^2";
    auto o = cmd_dictionary(a, {});
    CHECK(as_double(o.json.at("result").at("max_commutator_residual")) <= 1e-6);
}

TEST_CASE("dictionary: preconditions and bad input") {
    DictionaryArgs a;
    a.op = "c1";
    a.X = "lotka-volterra";
    CHECK_THROWS_AS(cmd_dictionary(a, {}), UsageError);  // no --f
    a.op = "c9";
    CHECK_THROWS_AS(cmd_dictionary(a, {}), UsageError);
    a.op = "c3";
    a.X = "1;0";
    a.Y = "P";
    a.path = "0,0 -> 1,1";
    CHECK_THROWS_AS(cmd_dictionary(a, {}), UsageError);  // neither builtin nor P;Q
    a.op = "flowbox";
    a.h = "1/(";
    CHECK_THROWS_AS(cmd_dictionary(a, {}), UsageError);
}

TEST_CASE("holonomy via the command layer") {
    auto sn = cmd_holonomy("saddle-node", {}, std::nullopt, {});
    CHECK(sn.exit_code == kExitOk);
    const Json& a = sn.json.at("admissibility");
    CHECK(a.at("verdict") == "fail");
    CHECK(a.at("sectors").at(0).at("verdict") == "non-C1");
    CHECK(a.at("words").at(0).at("word") == "HPH");

    auto ls = cmd_holonomy("linear-saddle", {{"lambda", 1.0}}, std::nullopt, {});
    CHECK(ls.json.at("admissibility").at("sectors").at(0).at("verdict") == "diffeo-consistent");

    auto list = cmd_holonomy(std::nullopt, {}, std::nullopt, {});
    CHECK(list.json.at("builtins").size() == builtin_names().size());

    CHECK_THROWS_AS(cmd_holonomy("nonexistent", {}, std::nullopt, {}), UsageError);
    CHECK_THROWS_AS(cmd_holonomy("linear-saddle", {{"mu", 1.0}}, std::nullopt, {}), UsageError);
    CHECK_THROWS_AS(cmd_holonomy("muller", {}, "1/z", {}), UsageError);
}

TEST_CASE("word command") {
    auto o = cmd_word("HHHH");
    CHECK(o.json.at("check").at("valid").get<bool>());
    CHECK(o.json.at("germ").at("kind") == "pole");
    CHECK_THROWS_AS(cmd_word("HQ"), UsageError);
}
