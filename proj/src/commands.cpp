#include "holoflow/commands.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "holoflow/svg.hpp"

namespace holoflow::cli {

using report::number;
using report::point;

// ------------------------------------------------------------ config

Json Config::echo() const {
    return {{"window", {number(window.x0), number(window.y0), number(window.x1), number(window.y1)}},
            {"tol", number(tol)},
            {"seed_grid", seed_grid},
            {"theta", number(theta)},
            {"sweep_tau", number(sweep_tau)},
            {"curve_tau", number(curve_tau)},
            {"epsilon", number(epsilon)},
            {"grid", grid},
            {"holonomy_levels", holonomy_levels},
            {"admissibility", admissibility}};
}

namespace {

double positive_number(const Json& v, const std::string& key) {
    if (!v.is_number() || !(v.get<double>() > 0)) throw UsageError("config /" + key + ": expected a positive number");
    return v.get<double>();
}

int positive_int(const Json& v, const std::string& key, int min = 1) {
    if (!v.is_number_integer() || v.get<int>() < min)
        throw UsageError("config /" + key + ": expected an integer >= " + std::to_string(min));
    return v.get<int>();
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t at = s.find(sep, start);
        out.push_back(s.substr(start, at == std::string::npos ? std::string::npos : at - start));
        if (at == std::string::npos) break;
        start = at + sep.size();
    }
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + s + "' is not a number");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw UsageError(what + ": '" + s + "' is not a number");
    return v;
}

void validate_window(const Window& w) {
    if (!(w.x1 > w.x0) || !(w.y1 > w.y0)) throw UsageError("window: need x0 < x1 and y0 < y1");
}

}  // namespace

void apply_config(const Json& doc, Config& cfg) {
    if (!doc.is_object()) throw UsageError("config: expected a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        const Json& v = it.value();
        if (k == "window") {
            if (!v.is_array() || v.size() != 4 || !std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_number(); }))
                throw UsageError("config /window: expected [x0, y0, x1, y1]");
            cfg.window = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
            validate_window(cfg.window);
        } else if (k == "tol") {
            cfg.tol = positive_number(v, k);
        } else if (k == "seed_grid") {
            cfg.seed_grid = positive_int(v, k, 0);
        } else if (k == "theta") {
            if (!v.is_number()) throw UsageError("config /theta: expected a number");
            cfg.theta = v.get<double>();
        } else if (k == "sweep_tau") {
            cfg.sweep_tau = positive_number(v, k);
        } else if (k == "curve_tau") {
            cfg.curve_tau = positive_number(v, k);
        } else if (k == "epsilon") {
            cfg.epsilon = positive_number(v, k);
        } else if (k == "grid") {
            cfg.grid = positive_int(v, k, 10);
        } else if (k == "holonomy_levels") {
            cfg.holonomy_levels = positive_int(v, k, 5);
        } else if (k == "admissibility") {
            if (!v.is_boolean()) throw UsageError("config /admissibility: expected a boolean");
            cfg.admissibility = v.get<bool>();
        } else {
            throw UsageError("config /" + k + ": unknown key");
        }
    }
}

Config load_config(const std::string& path, Config base) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw UsageError("config file '" + path + "' is not valid JSON");
    apply_config(doc, base);
    return base;
}

Window parse_window(const std::string& text) {
    auto parts = split(text, ",");
    if (parts.size() != 4) throw UsageError("window: expected x0,y0,x1,y1");
    Window w{to_double(parts[0], "window"), to_double(parts[1], "window"), to_double(parts[2], "window"),
             to_double(parts[3], "window")};
    validate_window(w);
    return w;
}

Complex parse_point(const std::string& text) {
    auto parts = split(text, ",");
    if (parts.size() != 2) throw UsageError("point: expected x,y");
    return {to_double(parts[0], "point"), to_double(parts[1], "point")};
}

PathSpec parse_path(const std::string& text) {
    std::vector<Complex> pts;
    for (const auto& p : split(text, "->")) pts.push_back(parse_point(p));
    if (pts.size() < 2) throw UsageError("path: expected at least two points separated by '->'");
    return PathSpec(std::move(pts));
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& it : items) {
        auto eq = it.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("param: expected name=value, got '" + it + "'");
        out[it.substr(0, eq)] = to_double(it.substr(eq + 1), "param " + it.substr(0, eq));
    }
    return out;
}

// ------------------------------------------------------------ helpers

namespace {

FieldExpr parse_or_usage(const std::string& text) {
    try {
        return parse_field(text);
    } catch (const ParseError& e) {
        throw UsageError(std::string("field: ") + e.what());
    }
}

SkeletonOptions skeleton_options(const Config& cfg) {
    SkeletonOptions o;
    o.theta = cfg.theta;
    o.sweep_grid = cfg.seed_grid;
    o.sweep = cfg.seed_grid >= 2;
    o.sweep_tau = cfg.sweep_tau;
    o.curve_tau = cfg.curve_tau;
    o.curve_rtol = cfg.tol;
    return o;
}

DecomposeOptions decompose_options(const Config& cfg) {
    DecomposeOptions o;
    o.epsilon = cfg.epsilon;
    o.grid = cfg.grid;
    o.skeleton = skeleton_options(cfg);
    return o;
}

struct Stages {
    Json list = Json::array();
    bool failed = false;

    template <class F>
    bool run(const std::string& name, F&& body) {
        try {
            body();
            list.push_back({{"stage", name}, {"status", "ok"}, {"message", ""}});
            return true;
        } catch (const std::exception& e) {
            list.push_back({{"stage", name}, {"status", "failed"}, {"message", e.what()}});
            failed = true;
            return false;
        }
    }
};

Json census_summary(const SingularityCensus& census, std::set<std::string>& tags) {
    Json list = Json::array();
    for (const auto& s : census.finite) {
        list.push_back(report::to_json(s));
        if (!s.word.tag().empty()) tags.insert(s.word.tag());
    }
    Json inf = report::to_json(census.infinity);
    list.push_back(inf);
    if (census.infinity.kind == SingularityKind::Essential) tags.insert("essential-at-infinity");
    return list;
}

Json field_json(const FieldExpr& h) {
    return {{"text", h.source_text()}, {"printed", h.print()}, {"rational", h.is_rational()}};
}

}  // namespace

// ------------------------------------------------------------ analyze & co

Outcome cmd_analyze(const std::string& field, const Config& cfg, bool want_svg) {
    const FieldExpr h = parse_or_usage(field);
    Outcome out;
    Json j = report::envelope("analyze");
    j["field"] = field_json(h);
    j["config"] = cfg.echo();
    Stages st;
    std::set<std::string> tags;

    SingularityCensus census;
    if (st.run("singularities", [&] { census = analyze_singularities(h, cfg.window); })) {
        j["singularities"] = census_summary(census, tags);
        j["singularity_warnings"] = census.warnings;
    }
    std::optional<Skeleton> sk;
    if (!st.failed && st.run("skeleton", [&] { sk = separatrix_skeleton(h, cfg.window, skeleton_options(cfg)); }))
        j["skeleton"] = report::to_json(*sk);
    std::optional<Decomposition> d;
    if (sk && st.run("decompose", [&] { d = decompose(h, *sk, decompose_options(cfg)); })) {
        j["regions"] = report::to_json(*d);
    }
    if (sk && cfg.admissibility) {
        st.run("admissibility", [&] {
            HolonomyOptions ho;
            ho.levels = cfg.holonomy_levels;
            ho.rtol = cfg.tol;
            j["admissibility"] = report::to_json(admissibility_report(h, *sk, ho));
        });
    }
    if (want_svg && sk)
        st.run("svg", [&] { out.svg = svg::phase_portrait(h, *sk, d ? &*d : nullptr); });
    j["stages"] = st.list;
    j["tags"] = Json(std::vector<std::string>(tags.begin(), tags.end()));
    out.json = std::move(j);
    out.exit_code = st.failed ? kExitNumeric : kExitOk;
    return out;
}

Outcome cmd_decompose(const std::string& field, const Config& cfg, bool want_svg) {
    const FieldExpr h = parse_or_usage(field);
    Outcome out;
    Json j = report::envelope("decompose");
    j["field"] = field_json(h);
    j["config"] = cfg.echo();
    Stages st;
    std::optional<Skeleton> sk;
    std::optional<Decomposition> d;
    if (st.run("skeleton", [&] { sk = separatrix_skeleton(h, cfg.window, skeleton_options(cfg)); }) &&
        st.run("decompose", [&] { d = decompose(h, *sk, decompose_options(cfg)); })) {
        j["regions"] = report::to_json(*d);
        j["skeleton"] = {{"curve_count", sk->curves.size()}, {"heuristic", sk->heuristic}};
        if (want_svg) st.run("svg", [&] { out.svg = svg::phase_portrait(h, *sk, &*d); });
    }
    j["stages"] = st.list;
    out.json = std::move(j);
    out.exit_code = st.failed ? kExitNumeric : kExitOk;
    return out;
}

Outcome cmd_trace(const std::string& field, Complex from, double tau, const Config& cfg, bool want_svg) {
    const FieldExpr h = parse_or_usage(field);
    if (tau == 0.0) throw UsageError("trace: tau must be nonzero");
    Outcome out;
    Json j = report::envelope("trace");
    j["field"] = field_json(h);
    j["config"] = cfg.echo();
    j["from"] = point(from);
    j["tau"] = number(tau);
    Stages st;
    std::optional<Skeleton> sk;
    SkeletonOptions so = skeleton_options(cfg);
    so.sweep = false;
    st.run("skeleton", [&] { sk = separatrix_skeleton(h, cfg.window, so); });
    FlowOptions fo;
    if (sk) fo = sk->flow;
    fo.rtol = cfg.tol;
    fo.atol = 1e-14;
    fo.window = cfg.window;
    std::optional<Trajectory> t;
    if (st.run("trace", [&] { t = integrate_real_flow(h, from, tau, cfg.theta, fo); }))
        j["trajectory"] = report::to_json(*t, 200);
    if (want_svg && sk && t) st.run("svg", [&] { out.svg = svg::phase_portrait(h, *sk, nullptr, {*t}); });
    j["stages"] = st.list;
    out.json = std::move(j);
    out.exit_code = st.failed ? kExitNumeric : kExitOk;
    return out;
}

// ------------------------------------------------------------ glue

Outcome cmd_glue(const std::optional<std::string>& spec_text, const std::optional<std::string>& pattern,
                 const Config&, bool want_svg) {
    GluingSpec spec;
    Outcome out;
    Json j = report::envelope("glue");
    if (pattern) {
        auto parts = split(*pattern, ":");
        if (parts[0] == "pole" && parts.size() == 2) {
            double k = to_double(parts[1], "pattern order");
            if (k < 0 || k != std::floor(k)) throw UsageError("pattern: pole order must be a non-negative integer");
            spec = pole_gluing(static_cast<int>(k));
        } else if (parts[0] == "saddle-node" && parts.size() <= 2) {
            spec = saddle_node_gluing(parts.size() == 2 ? to_double(parts[1], "pattern height") : 1.0);
        } else {
            throw UsageError("pattern: expected pole:K or saddle-node[:h]");
        }
        j["pattern"] = *pattern;
    } else if (spec_text) {
        Json doc = Json::parse(*spec_text, nullptr, false);
        if (doc.is_discarded()) {
            j["schema_errors"] = Json::array({{{"pointer", ""}, {"message", "not valid JSON"}}});
            out.json = std::move(j);
            out.exit_code = kExitUsage;
            return out;
        }
        try {
            spec = report::parse_gluing(doc);
        } catch (const report::SpecError& e) {
            Json errs = Json::array();
            for (const auto& i : e.issues()) errs.push_back({{"pointer", i.pointer}, {"message", i.message}});
            j["schema_errors"] = std::move(errs);
            out.json = std::move(j);
            out.exit_code = kExitUsage;
            return out;
        }
    } else {
        throw UsageError("glue: give a spec file or --pattern");
    }
    j["spec"] = report::gluing_to_json(spec);
    auto rep = validate_gluing(spec);
    j["validation"] = report::to_json(rep);
    if (!rep.valid()) {
        out.json = std::move(j);
        out.exit_code = kExitUsage;
        return out;
    }
    Stages st;
    st.run("surface", [&] {
        auto s = build_surface(spec);
        auto gaps = detect_gaps(s);
        j["surface"] = report::to_json(s, gaps);
        Json words = Json::array();
        for (const auto& w : s.words()) words.push_back(w.str());
        j["words"] = std::move(words);
        if (want_svg) out.svg = svg::gluing_net(s);
    });
    j["stages"] = st.list;
    out.json = std::move(j);
    out.exit_code = st.failed ? kExitNumeric : kExitOk;
    return out;
}

// ------------------------------------------------------------ holonomy

Outcome cmd_holonomy(const std::optional<std::string>& builtin, const std::map<std::string, double>& params,
                     const std::optional<std::string>& field, const Config& cfg) {
    Outcome out;
    Json j = report::envelope("holonomy");
    j["config"] = cfg.echo();
    HolonomyOptions ho;
    ho.levels = cfg.holonomy_levels;
    Stages st;
    if (field) {
        if (builtin) throw UsageError("holonomy: give either a built-in name or --field");
        const FieldExpr h = parse_or_usage(*field);
        j["field"] = field_json(h);
        ho.rtol = cfg.tol;
        st.run("admissibility", [&] {
            auto sk = separatrix_skeleton(h, cfg.window, skeleton_options(cfg));
            j["admissibility"] = report::to_json(admissibility_report(h, sk, ho));
        });
    } else if (builtin) {
        BuiltinField b;
        try {
            b = builtin_field(*builtin, params);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        j["builtin"] = {{"name", b.name}, {"description", b.description}};
        Json pj = Json::object();
        for (const auto& [k, v] : b.params) pj[k] = number(v);
        j["builtin"]["params"] = std::move(pj);
        b.input.holonomy.levels = cfg.holonomy_levels;
        st.run("admissibility", [&] { j["admissibility"] = report::to_json(admissibility_report(b.input)); });
    } else {
        Json names = Json::array();
        for (const auto& n : builtin_names()) names.push_back(n);
        j["builtins"] = std::move(names);
    }
    j["stages"] = st.list;
    out.json = std::move(j);
    out.exit_code = st.failed ? kExitNumeric : kExitOk;
    return out;
}

// ------------------------------------------------------------ dictionary

namespace {

struct Resolved {
    PlanarField field;
    std::optional<ProbeRegion> probe;
    std::map<std::string, double> params;
};

std::map<std::string, Complex> cparams(const std::map<std::string, double>& p) {
    std::map<std::string, Complex> out;
    for (auto [k, v] : p) out[k] = v;
    return out;
}

// "name" of a built-in planar field, or "a;b" component expressions.
Resolved resolve_planar(const std::string& text, const std::map<std::string, double>& params) {
    Resolved r;
    auto names = builtin_names();
    if (std::find(names.begin(), names.end(), text) != names.end()) {
        BuiltinField b;
        try {
            b = builtin_field(text, params);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        r.field = b.input.X;
        r.probe = b.probe;
        r.params = b.params;
        return r;
    }
    auto parts = split(text, ";");
    if (parts.size() != 2) throw UsageError("field '" + text + "': expected a built-in name or 'a;b'");
    r.field = PlanarField::parse(parts[0], parts[1], cparams(params));
    r.params = params;
    return r;
}

Json sample_scalar(const ScalarField& f, const std::vector<Vec2>& pts) {
    Json rows = Json::array();
    for (Vec2 p : pts) rows.push_back({number(p.x), number(p.y), number(f(p.x, p.y))});
    return rows;
}

Json sample_planar(const PlanarField& X, const std::vector<Vec2>& pts) {
    Json rows = Json::array();
    for (Vec2 p : pts) {
        Vec2 v = X(p);
        rows.push_back({number(p.x), number(p.y), number(v.x), number(v.y)});
    }
    return rows;
}

Json path_result(const PathIntegralResult& r) {
    return {{"value", number(r.value)},
            {"alternate", r.alternate ? number(*r.alternate) : Json(nullptr)},
            {"closedness_residual", number(r.closedness_residual)},
            {"multivalued", r.multivalued}};
}

const std::string& need(const std::optional<std::string>& v, const char* flag, const std::string& op) {
    if (!v) throw UsageError("dictionary " + op + ": missing --" + std::string(flag));
    return *v;
}

}  // namespace

Outcome cmd_dictionary(const DictionaryArgs& a, const Config& cfg) {
    Outcome out;
    Json j = report::envelope("dictionary");
    j["op"] = a.op;
    ProbeRegion probe;
    probe.rect = cfg.window;
    auto probe_for = [&](const Resolved& r) { return r.probe.value_or(probe); };
    Json res;
    try {
        if (a.op == "c1") {
            auto X = resolve_planar(need(a.X, "X", a.op), a.params);
            auto f = ScalarField::parse(need(a.f, "f", a.op), cparams(X.params));
            auto pr = probe_for(X);
            auto r = op_c1(f, X.field, pr);
            res = {{"mu", sample_scalar(r.mu, pr.samples())},
                   {"lie_residual", number(r.lie_residual)},
                   {"formula_disagreement", number(r.formula_disagreement)}};
        } else if (a.op == "c1inv") {
            auto X = resolve_planar(need(a.X, "X", a.op), a.params);
            auto mu = ScalarField::parse(need(a.mu, "mu", a.op), cparams(X.params));
            std::optional<PathSpec> alt;
            if (a.alternate) alt = parse_path(*a.alternate);
            res = path_result(op_c1_inverse(mu, X.field, parse_path(need(a.path, "path", a.op)), probe_for(X), alt));
        } else if (a.op == "c2") {
            auto f = ScalarField::parse(need(a.f, "f", a.op), cparams(a.params));
            res = {{"Y", sample_planar(op_c2(f), probe.samples())}};
        } else if (a.op == "c3") {
            auto X = resolve_planar(need(a.X, "X", a.op), a.params);
            auto Y = resolve_planar(need(a.Y, "Y", a.op), X.params);
            std::optional<PathSpec> alt;
            if (a.alternate) alt = parse_path(*a.alternate);
            res = path_result(op_c3(Y.field, X.field, parse_path(need(a.path, "path", a.op)), alt));
        } else if (a.op == "c4") {
            auto X = resolve_planar(need(a.X, "X", a.op), a.params);
            auto mu = ScalarField::parse(need(a.mu, "mu", a.op), cparams(X.params));
            auto pr = probe_for(X);
            auto r = op_c4(mu, X.field, pr);
            res = {{"Y", sample_planar(r.Y, pr.samples())},
                   {"hamiltonian", r.hamiltonian},
                   {"bracket_residual", number(r.bracket_residual)}};
        } else if (a.op == "c5") {
            auto X = resolve_planar(need(a.X, "X", a.op), a.params);
            auto Y = resolve_planar(need(a.Y, "Y", a.op), X.params);
            auto pr = probe_for(X);
            auto r = op_c5(Y.field, X.field, pr);
            res = {{"mu", sample_scalar(r.mu, pr.samples())},
                   {"integrability_residual", number(r.integrability_residual)}};
        } else if (a.op == "flowbox") {
            auto h = parse_or_usage(need(a.h, "h", a.op));
            auto r = flow_box(h, parse_path(need(a.path, "path", a.op)));
            res = {{"value", point(r.value)}, {"error_estimate", number(r.error_estimate)}};
        } else if (a.op == "pushforward") {
            auto h = parse_or_usage(need(a.h, "h", a.op));
            res = {{"residual", number(pushforward_residual(h, parse_point(need(a.at, "at", a.op))))}};
        } else if (a.op == "harmonic") {
            auto V = ScalarField::parse(need(a.V, "V", a.op), cparams(a.params));
            auto [X, Y] = harmonic_pair(V);
            double worst = 0.0;
            Json rows = Json::array();
            for (Vec2 p : probe.samples()) {
                try {
                    double r = adapted_structure_residual(X, Y, p);
                    worst = std::max(worst, r);
                    rows.push_back({number(p.x), number(p.y), number(r)});
                } catch (const DictionaryError&) {
                    rows.push_back({number(p.x), number(p.y), nullptr});
                }
            }
            res = {{"X", sample_planar(X, probe.samples())},
                   {"Y", sample_planar(Y, probe.samples())},
                   {"commutator_residuals", std::move(rows)},
                   {"max_commutator_residual", number(worst)}};
        } else {
            throw UsageError("dictionary: unknown operator '" + a.op +
                             "' (c1 c1inv c2 c3 c4 c5 flowbox pushforward harmonic)");
        }
    } catch (const ParseError& e) {
        throw UsageError(std::string("expression: ") + e.what());
    } catch (const DictionaryError& e) {
        j["error"] = e.what();
        out.json = std::move(j);
        out.exit_code = kExitUsage;
        return out;
    } catch (const std::invalid_argument& e) {
        j["error"] = e.what();
        out.json = std::move(j);
        out.exit_code = kExitUsage;
        return out;
    }
    j["result"] = std::move(res);
    out.json = std::move(j);
    return out;
}

// ------------------------------------------------------------ word

Outcome cmd_word(const std::string& word) {
    CyclicWord w;
    try {
        w = CyclicWord::parse(word);
    } catch (const std::exception& e) {
        throw UsageError(std::string("word: ") + e.what());
    }
    Outcome out;
    Json j = report::envelope("word");
    j["word"] = w.str();
    auto check = validate_word(w);
    j["check"] = report::to_json(check);
    if (check.valid) {
        try {
            j["germ"] = report::to_json(word_to_germ(w));
        } catch (const WordError& e) {
            j["germ"] = nullptr;
            j["germ_error"] = e.what();
        }
    } else {
        j["germ"] = nullptr;
    }
    out.json = std::move(j);
    return out;
}

}  // namespace holoflow::cli
