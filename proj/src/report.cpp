#include "holoflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace holoflow::report {

Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    double r = std::strtod(buf, nullptr);
    if (r == 0.0) r = 0.0;  // no negative zero
    if (std::abs(r) < 9e15 && r == std::floor(r)) return static_cast<std::int64_t>(r);
    return r;
}

Json point(Complex z) { return Json::array({number(z.real()), number(z.imag())}); }
Json point(Vec2 p) { return Json::array({number(p.x), number(p.y)}); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace {

template <class T>
Json opt_number(const std::optional<T>& v) {
    return v ? number(static_cast<double>(*v)) : Json(nullptr);
}

Json strings(const std::vector<std::string>& v) {
    Json a = Json::array();
    for (const auto& s : v) a.push_back(s);
    return a;
}

}  // namespace

Json envelope(const std::string& command) {
    Json j;
    j["schema"] = kReportSchema;
    j["command"] = command;
    j["tool"] = {{"name", "holoflow"}, {"version", kToolVersion}};
    return j;
}

Json to_json(const Singularity& s) {
    Json j;
    j["location"] = s.location ? point(*s.location) : Json("infinity");
    j["kind"] = kind_name(s.kind);
    j["order"] = s.order;
    j["residue"] = point(s.residue);
    j["lambda"] = s.lambda ? point(*s.lambda) : Json(nullptr);
    j["word"] = s.word.str();
    j["tag"] = s.word.tag();
    j["method"] = s.method;
    return j;
}

Json to_json(const Trajectory& t, std::size_t max_samples) {
    Json j;
    j["verdict"] = verdict_name(t.verdict);
    j["direction"] = t.direction;
    j["theta"] = number(t.theta);
    j["elapsed"] = number(t.elapsed());
    j["gx_length"] = number(t.gx_length);
    j["hit_point"] = t.hit_point ? point(*t.hit_point) : Json(nullptr);
    j["period"] = opt_number(t.period);
    j["tends_to_zero"] = t.tends_to_zero;
    j["note"] = t.note;
    j["sample_count"] = t.samples.size();
    Json pts = Json::array();
    const std::size_t n = t.samples.size();
    if (n > 0 && max_samples > 0) {
        const std::size_t m = std::min(n, std::max<std::size_t>(max_samples, 2));
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t i = m == 1 ? 0 : k * (n - 1) / (m - 1);
            const auto& s = t.samples[i];
            if (!std::isfinite(s.z.real()) || !std::isfinite(s.z.imag())) continue;
            pts.push_back({{"tau", number(s.tau)}, {"z", point(s.z)}});
        }
    }
    j["samples"] = std::move(pts);
    return j;
}

Json to_json(const Skeleton& sk) {
    Json j;
    j["theta"] = number(sk.theta);
    j["window"] = {number(sk.window.x0), number(sk.window.y0), number(sk.window.x1), number(sk.window.y1)};
    j["heuristic"] = sk.heuristic;
    j["warnings"] = strings(sk.warnings);
    Json curves = Json::array();
    int truncated = 0;
    for (const auto& c : sk.curves) {
        Json cj;
        cj["origin"] = c.origin;
        cj["start_vertex"] = c.start_vertex;
        cj["end_vertex"] = c.end_vertex;
        cj["truncated"] = c.truncated;
        cj["verdict"] = verdict_name(c.traj.verdict);
        cj["samples"] = c.traj.samples.size();
        const auto& pts = c.traj.samples;
        if (!pts.empty()) {
            cj["first"] = point(pts.front().z);
            cj["last"] = point(pts.back().z);
        }
        truncated += c.truncated;
        curves.push_back(std::move(cj));
    }
    j["curve_count"] = sk.curves.size();
    j["truncated_curves"] = truncated;
    j["curves"] = std::move(curves);
    const auto& s = sk.sweep;
    j["sweep"] = {{"seeds", s.seeds},
                  {"integrations", s.integrations},
                  {"complete", s.complete},
                  {"periodic", s.periodic},
                  {"hits_singularity", s.hits_singularity},
                  {"escapes", s.escapes},
                  {"unexplained_incomplete", s.unexplained_incomplete},
                  {"witnesses", s.witnesses.size()}};
    return j;
}

Json to_json(const Decomposition& d) {
    Json j;
    std::map<std::string, int> census;
    for (auto k : {RegionKind::HalfPlane, RegionKind::Strip, RegionKind::HalfCylinder, RegionKind::Annulus,
                   RegionKind::Unresolved})
        census[region_kind_name(k)] = d.count(k);
    j["census"] = census;
    j["grid"] = d.grid;
    j["warnings"] = strings(d.warnings);
    Json regions = Json::array();
    for (const auto& r : d.regions) {
        Json rj;
        rj["kind"] = region_kind_name(r.kind);
        rj["truncated"] = r.truncated;
        rj["modulus"] = {{"height", opt_number(r.modulus.height)},
                         {"r", opt_number(r.modulus.r)},
                         {"R", opt_number(r.modulus.R)}};
        rj["centroid"] = point(r.centroid);
        rj["seed"] = point(r.seed);
        rj["boundary_refs"] = r.boundary_refs;
        rj["cells"] = r.cells;
        Json levels = Json::array();
        for (double l : r.levels) levels.push_back(number(l));
        rj["levels"] = std::move(levels);
        rj["center"] = r.center ? Json(*r.center) : Json(nullptr);
        rj["note"] = r.note;
        regions.push_back(std::move(rj));
    }
    j["regions"] = std::move(regions);
    return j;
}

Json to_json(const HolonomyReport& r) {
    Json j;
    j["verdict"] = holonomy_verdict_name(r.verdict);
    j["reason"] = r.reason;
    j["direction"] = r.direction;
    j["transversality"] = number(r.transversality);
    Json samples = Json::array();
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const auto& s = r.samples[i];
        Json sj{{"s", number(s.s)}, {"hol", s.hol ? number(*s.hol) : Json(nullptr)}, {"arc", number(s.arc)}};
        if (!s.failure.empty()) sj["failure"] = s.failure;
        if (i < r.quotients.size()) sj["quotient"] = number(r.quotients[i]);
        samples.push_back(std::move(sj));
    }
    j["map_samples"] = std::move(samples);
    Json ratios = Json::array();
    for (double q : r.ratios) ratios.push_back(number(q));
    j["ratios"] = std::move(ratios);
    Json d = Json::array();
    for (const auto& v : r.derivatives) d.push_back(opt_number(v));
    j["derivative_estimates"] = std::move(d);
    Json table = Json::array();
    for (double v : r.first_derivative_table) table.push_back(number(v));
    j["first_derivative_table"] = std::move(table);
    return j;
}

Json to_json(const FirstReturnReport& r) {
    Json j;
    j["seed"] = point(r.seed);
    j["normal"] = point(r.normal);
    j["max_deviation"] = number(r.max_deviation);
    j["orbit_length"] = number(r.orbit_length);
    Json m = Json::array();
    for (auto [s, p] : r.map) m.push_back({number(s), number(p)});
    j["map"] = std::move(m);
    return j;
}

Json to_json(const AdmissibilityReport& r) {
    Json j;
    j["verdict"] = condition_verdict_name(r.verdict);
    Json conds = Json::array();
    auto cond = [](const Condition& c) {
        return Json{{"name", c.name}, {"verdict", condition_verdict_name(c.verdict)}, {"detail", c.detail}};
    };
    for (const auto& c : r.conditions) conds.push_back(cond(c));
    j["conditions"] = std::move(conds);
    j["flow_box"] = r.flow_box ? cond(*r.flow_box) : Json(nullptr);
    if (r.flow_box_check) {
        Json res = Json::array();
        for (const auto& [p, v] : r.flow_box_check->residuals) res.push_back({{"at", point(p)}, {"residual", number(v)}});
        j["flow_box_residuals"] = std::move(res);
    }
    Json sectors = Json::array();
    for (const auto& s : r.sectors) {
        Json sj = to_json(s.report);
        sj["name"] = s.name;
        sectors.push_back(std::move(sj));
    }
    j["sectors"] = std::move(sectors);
    Json returns = Json::array();
    for (const auto& rr : r.returns) {
        Json rj = rr.report ? to_json(*rr.report) : Json{{"seed", point(rr.seed)}};
        rj["error"] = rr.error.empty() ? Json(nullptr) : Json(rr.error);
        returns.push_back(std::move(rj));
    }
    j["returns"] = std::move(returns);
    Json words = Json::array();
    for (const auto& w : r.words)
        words.push_back({{"where", w.where},
                         {"word", w.word.str()},
                         {"expected", w.expected ? Json(w.expected->str()) : Json(nullptr)},
                         {"ok", w.ok}});
    j["words"] = std::move(words);
    return j;
}

Json to_json(const GluingReport& r) {
    Json j;
    j["valid"] = r.valid();
    Json v = Json::array();
    for (const auto& x : r.violations) v.push_back({{"where", x.where}, {"message", x.message}});
    j["violations"] = std::move(v);
    return j;
}

Json to_json(const FlatSurface& s, const GapReport& gaps) {
    Json j;
    Json pieces = Json::array();
    for (const auto& p : s.spec.pieces) pieces.push_back({{"id", p.id}, {"kind", piece_kind_name(p.kind)}});
    j["pieces"] = std::move(pieces);
    Json segs = Json::array();
    for (const auto& g : s.segments) {
        Json gj;
        gj["label"] = g.label;
        gj["piece"] = s.spec.pieces.at(g.piece).id;
        gj["level"] = number(g.level);
        gj["from"] = number(g.from);
        gj["to"] = number(g.to);
        gj["orientation"] = g.orientation;
        gj["partner"] = g.partner >= 0 ? Json(s.segments[g.partner].label) : Json(nullptr);
        gj["translation"] = g.partner >= 0 ? point(g.translation) : Json(nullptr);
        gj["transverse"] = g.transverse;
        segs.push_back(std::move(gj));
    }
    j["segments"] = std::move(segs);
    Json verts = Json::array();
    for (const auto& v : s.vertices) {
        Json corners = Json::array();
        for (int c : v.corners) corners.push_back(s.spec.pieces.at(s.corners[c].piece).id);
        verts.push_back({{"word", v.word.str()},
                         {"tag", v.word.tag()},
                         {"open", v.open},
                         {"ideal", v.ideal},
                         {"period", point(v.period)},
                         {"corners", std::move(corners)}});
    }
    j["vertices"] = std::move(verts);
    Json unglued = Json::array();
    for (int u : s.unglued) unglued.push_back(s.segments[u].label);
    j["unglued"] = std::move(unglued);
    Json gl = Json::array();
    for (const auto& g : gaps.gaps) {
        Json labels = Json::array();
        for (int k : g.segments) labels.push_back(s.segments[k].label);
        gl.push_back({{"segments", std::move(labels)}, {"length", number(g.length)}, {"hint", g.hint},
                      {"vertices", g.vertices}});
    }
    j["gaps"] = std::move(gl);
    Json rays = Json::array();
    for (int k : gaps.infinite_rays) rays.push_back(s.segments[k].label);
    j["infinite_rays"] = std::move(rays);
    return j;
}

Json to_json(const WordCheck& w) {
    return {{"valid", w.valid},
            {"first_violation", w.first_violation ? Json(*w.first_violation) : Json(nullptr)},
            {"message", w.message}};
}

Json to_json(const GermSummary& g) {
    return {{"kind", g.kind}, {"order", opt_number(g.order)}, {"lambda", g.lambda}, {"description", g.description}};
}

// ------------------------------------------------------------ gluing specs

SpecError::SpecError(std::vector<SchemaIssue> issues)
    : std::runtime_error(issues.empty() ? "invalid gluing spec"
                                        : issues.front().pointer + ": " + issues.front().message),
      issues_(std::move(issues)) {}

namespace {

class Reader {
public:
    std::vector<SchemaIssue> issues;

    void fail(const std::string& at, const std::string& msg) { issues.push_back({at, msg}); }

    const Json* member(const Json& obj, const std::string& at, const std::string& key, bool required) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(at + "/" + key, "missing required member");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string(const Json& obj, const std::string& at, const std::string& key,
                                      bool required = true) {
        const Json* v = member(obj, at, key, required);
        if (!v) return std::nullopt;
        if (!v->is_string() || v->get_ref<const std::string&>().empty()) {
            fail(at + "/" + key, "expected a non-empty string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<double> positive(const Json& obj, const std::string& at, const std::string& key) {
        const Json* v = member(obj, at, key, false);
        if (!v) return std::nullopt;
        if (!v->is_number() || !(v->get<double>() > 0)) {
            fail(at + "/" + key, "expected a positive number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    const Json* array(const Json& obj, const std::string& at, const std::string& key, bool required = true) {
        const Json* v = member(obj, at, key, required);
        if (v && !v->is_array()) {
            fail(at + "/" + key, "expected an array");
            return nullptr;
        }
        return v;
    }

    std::vector<std::pair<std::string, std::string>> pairs(const Json& obj, const std::string& at,
                                                           const std::string& key) {
        std::vector<std::pair<std::string, std::string>> out;
        const Json* a = array(obj, at, key);
        if (!a) return out;
        for (std::size_t i = 0; i < a->size(); ++i) {
            const Json& p = (*a)[i];
            const std::string here = at + "/" + key + "/" + std::to_string(i);
            if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
                fail(here, "expected a pair of segment labels");
                continue;
            }
            out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
        }
        return out;
    }

    SegmentSpec segment(const Json& s, const std::string& at) {
        SegmentSpec out;
        if (!s.is_object()) {
            fail(at, "expected an object");
            return out;
        }
        out.label = string(s, at, "label").value_or("");
        if (const Json* len = member(s, at, "length", true)) {
            if (len->is_string() && (*len == "inf" || *len == "infinite")) {
                out.length = kInfinite;
            } else if (len->is_number() && len->get<double>() > 0) {
                out.length = len->get<double>();
            } else {
                fail(at + "/length", "expected a positive number or \"inf\"");
            }
        }
        if (const Json* o = member(s, at, "orientation", false)) {
            if (o->is_number_integer() && (o->get<int>() == 1 || o->get<int>() == -1))
                out.orientation = o->get<int>();
            else
                fail(at + "/orientation", "expected 1 or -1");
        }
        return out;
    }

    BoundarySpec boundary(const Json& b, const std::string& at) {
        BoundarySpec out;
        if (!b.is_object()) {
            fail(at, "expected an object");
            return out;
        }
        out.name = string(b, at, "name").value_or("");
        if (const Json* off = member(b, at, "offset", false)) {
            if (off->is_number())
                out.offset = off->get<double>();
            else
                fail(at + "/offset", "expected a number");
        }
        if (const Json* segs = array(b, at, "segments")) {
            if (segs->empty()) fail(at + "/segments", "expected at least one segment");
            for (std::size_t i = 0; i < segs->size(); ++i)
                out.segments.push_back(segment((*segs)[i], at + "/segments/" + std::to_string(i)));
        }
        return out;
    }

    PieceSpec piece(const Json& p, const std::string& at) {
        PieceSpec out;
        if (!p.is_object()) {
            fail(at, "expected an object");
            return out;
        }
        out.id = string(p, at, "id").value_or("");
        if (auto kind = string(p, at, "kind")) {
            if (auto k = piece_kind_from_name(*kind))
                out.kind = *k;
            else
                fail(at + "/kind", "unknown piece kind '" + *kind + "'");
        }
        if (auto side = string(p, at, "side", false)) {
            if (*side == "upper")
                out.side = +1;
            else if (*side == "lower")
                out.side = -1;
            else
                fail(at + "/side", "expected \"upper\" or \"lower\"");
        }
        out.h = positive(p, at, "h");
        out.r = positive(p, at, "r");
        out.R = positive(p, at, "R");
        if (const Json* bs = array(p, at, "boundaries")) {
            for (std::size_t i = 0; i < bs->size(); ++i)
                out.boundaries.push_back(boundary((*bs)[i], at + "/boundaries/" + std::to_string(i)));
        }
        return out;
    }
};

}  // namespace

GluingSpec parse_gluing(const Json& doc) {
    Reader rd;
    GluingSpec spec;
    if (!doc.is_object()) throw SpecError(std::vector<SchemaIssue>{{"", "expected a JSON object"}});
    if (auto schema = rd.string(doc, "", "schema")) {
        if (*schema != kGluingSchema) rd.fail("/schema", "expected \"" + std::string(kGluingSchema) + "\"");
    }
    if (const Json* ps = rd.array(doc, "", "pieces")) {
        for (std::size_t i = 0; i < ps->size(); ++i) spec.pieces.push_back(rd.piece((*ps)[i], "/pieces/" + std::to_string(i)));
    }
    spec.identifications = rd.pairs(doc, "", "identifications");
    std::optional<PeriodicSpec> periodic;
    int copies = 0;
    if (const Json* per = rd.member(doc, "", "periodic", false)) {
        if (!per->is_object()) {
            rd.fail("/periodic", "expected an object");
        } else {
            PeriodicSpec ps;
            ps.links = rd.pairs(*per, "/periodic", "links");
            if (const Json* c = rd.member(*per, "/periodic", "copies", true)) {
                if (c->is_number_integer() && c->get<int>() >= 1)
                    copies = c->get<int>();
                else
                    rd.fail("/periodic/copies", "expected a positive integer");
            }
            if (const Json* cy = rd.member(*per, "/periodic", "cyclic", false)) {
                if (cy->is_boolean())
                    ps.cyclic = cy->get<bool>();
                else
                    rd.fail("/periodic/cyclic", "expected a boolean");
            }
            periodic = std::move(ps);
        }
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        static const std::vector<std::string> known{"schema", "pieces", "identifications", "periodic", "note"};
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            rd.fail("/" + it.key(), "unknown member");
    }
    if (!rd.issues.empty()) throw SpecError(std::move(rd.issues));
    if (periodic) {
        periodic->cell = std::move(spec);
        return unroll(*periodic, copies);
    }
    return spec;
}

Json gluing_to_json(const GluingSpec& spec) {
    Json j;
    j["schema"] = kGluingSchema;
    Json pieces = Json::array();
    for (const auto& p : spec.pieces) {
        Json pj;
        pj["id"] = p.id;
        pj["kind"] = piece_kind_name(p.kind);
        if (p.kind == PieceKind::HalfPlane) pj["side"] = p.side > 0 ? "upper" : "lower";
        if (p.h) pj["h"] = number(*p.h);
        if (p.r) pj["r"] = number(*p.r);
        if (p.R) pj["R"] = number(*p.R);
        Json bs = Json::array();
        for (const auto& b : p.boundaries) {
            Json bj;
            bj["name"] = b.name;
            if (b.offset != 0.0) bj["offset"] = number(b.offset);
            Json segs = Json::array();
            for (const auto& s : b.segments) {
                Json sj{{"label", s.label}, {"length", number(s.length)}};
                if (s.orientation) sj["orientation"] = *s.orientation;
                segs.push_back(std::move(sj));
            }
            bj["segments"] = std::move(segs);
            bs.push_back(std::move(bj));
        }
        pj["boundaries"] = std::move(bs);
        pieces.push_back(std::move(pj));
    }
    j["pieces"] = std::move(pieces);
    Json ids = Json::array();
    for (const auto& [a, b] : spec.identifications) ids.push_back({a, b});
    j["identifications"] = std::move(ids);
    return j;
}

}  // namespace holoflow::report
