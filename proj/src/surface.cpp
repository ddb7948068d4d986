#include "holoflow/surface.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <boost/pending/disjoint_sets.hpp>

namespace holoflow {

namespace {

constexpr double kLengthTol = 1e-9;

bool lengths_match(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b);
    return std::abs(a - b) <= kLengthTol * std::max({1.0, std::abs(a), std::abs(b)});
}

enum class Shape { Line, Ray, Circle };

struct BoundaryModel {
    std::string name;
    double level;
    int orientation;
    Shape shape;
};

double annulus_width(double r, double R) { return r * std::log(R) / (2 * std::numbers::pi); }

std::vector<BoundaryModel> boundary_models(const PieceSpec& p) {
    switch (p.kind) {
        case PieceKind::HalfPlane: return {{"line", 0.0, p.side, Shape::Line}};
        case PieceKind::Strip: return {{"bottom", 0.0, +1, Shape::Line}, {"top", p.h.value_or(0), -1, Shape::Line}};
        case PieceKind::HalfCylinder: return {{"circle", 0.0, +1, Shape::Circle}};
        case PieceKind::Annulus: {
            double w = (p.r && p.R) ? annulus_width(*p.r, *p.R) : 0.0;
            return {{"inner", 0.0, +1, Shape::Circle}, {"outer", w, -1, Shape::Circle}};
        }
        case PieceKind::Parabolic: return {{"bottom", 0.0, +1, Shape::Ray}, {"top", p.h.value_or(0), -1, Shape::Ray}};
    }
    return {};
}

const BoundarySpec* find_boundary(const PieceSpec& p, const std::string& name) {
    // A half plane's single boundary may be left unnamed.
    for (const auto& b : p.boundaries)
        if (b.name == name || (b.name.empty() && p.boundaries.size() == 1 && boundary_models(p).size() == 1))
            return &b;
    return nullptr;
}

struct LaidOut {
    double from, to;
};

// Flow-time intervals of the segments of one boundary.
std::vector<LaidOut> lay_out(const BoundarySpec& b, Shape shape) {
    std::vector<LaidOut> out;
    const auto& seg = b.segments;
    if (shape == Shape::Line && seg.size() == 1) return {{-kInfinite, kInfinite}};
    double x = shape == Shape::Ray ? 0.0 : b.offset;
    for (std::size_t i = 0; i < seg.size(); ++i) {
        if (i == 0 && shape == Shape::Line) {
            out.push_back({-kInfinite, x});
        } else if (std::isinf(seg[i].length)) {
            out.push_back({x, kInfinite});
        } else {
            out.push_back({x, x + seg[i].length});
            x += seg[i].length;
        }
    }
    return out;
}

// Ray ends must agree: both segments reach -inf, both reach +inf, or both
// are full lines.
int infinite_end(double from, double to) {
    bool lo = std::isinf(from), hi = std::isinf(to);
    return lo && hi ? 3 : lo ? 1 : hi ? 2 : 0;
}

}  // namespace

std::string piece_kind_name(PieceKind k) {
    switch (k) {
        case PieceKind::HalfPlane: return "half-plane";
        case PieceKind::Strip: return "strip";
        case PieceKind::HalfCylinder: return "half-cylinder";
        case PieceKind::Annulus: return "annulus";
        case PieceKind::Parabolic: return "parabolic";
    }
    return "?";
}

std::optional<PieceKind> piece_kind_from_name(const std::string& name) {
    static const std::map<std::string, PieceKind> names = {
        {"half-plane", PieceKind::HalfPlane}, {"H", PieceKind::HalfPlane},     {"strip", PieceKind::Strip},
        {"S", PieceKind::Strip},              {"half-cylinder", PieceKind::HalfCylinder},
        {"C", PieceKind::HalfCylinder},       {"annulus", PieceKind::Annulus}, {"A", PieceKind::Annulus},
        {"parabolic", PieceKind::Parabolic},  {"P", PieceKind::Parabolic},
    };
    auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

GluingSpec unroll(const PeriodicSpec& periodic, int copies) {
    if (copies < 1) throw std::invalid_argument("unroll needs at least one copy");
    GluingSpec out;
    auto tag = [](const std::string& label, int n) { return label + "#" + std::to_string(n); };
    for (int n = 0; n < copies; ++n) {
        for (PieceSpec p : periodic.cell.pieces) {
            p.id = tag(p.id, n);
            for (auto& b : p.boundaries)
                for (auto& s : b.segments) s.label = tag(s.label, n);
            out.pieces.push_back(std::move(p));
        }
        for (const auto& [a, b] : periodic.cell.identifications) out.identifications.emplace_back(tag(a, n), tag(b, n));
    }
    const int links = periodic.cyclic ? copies : copies - 1;
    for (int n = 0; n < links; ++n)
        for (const auto& [a, b] : periodic.links) out.identifications.emplace_back(tag(a, n), tag(b, (n + 1) % copies));
    return out;
}

GluingSpec pole_gluing(int k) {
    if (k < 0) throw std::invalid_argument("pole order must be non-negative");
    GluingSpec g;
    const int n = 2 * k + 2;
    for (int j = 0; j < n; ++j) {
        PieceSpec p;
        p.id = "H" + std::to_string(j);
        p.side = j % 2 == 0 ? +1 : -1;
        p.boundaries = {{"line", {{p.id + ".in", kInfinite, {}}, {p.id + ".out", kInfinite, {}}}, 0.0}};
        g.pieces.push_back(std::move(p));
    }
    // Even pieces share their outgoing ray with the next piece, odd pieces
    // their incoming ray.
    for (int j = 0; j < n; ++j) {
        const std::string a = "H" + std::to_string(j), b = "H" + std::to_string((j + 1) % n);
        const char* ray = j % 2 == 0 ? ".out" : ".in";
        g.identifications.emplace_back(a + ray, b + ray);
    }
    return g;
}

GluingSpec saddle_node_gluing(double h) {
    GluingSpec g;
    PieceSpec up{"Hup", PieceKind::HalfPlane, +1, {}, {}, {}, {{"line", {{"up.in", kInfinite, {}}, {"up.out", kInfinite, {}}}, 0.0}}};
    PieceSpec down{"Hdown", PieceKind::HalfPlane, -1, {}, {}, {}, {{"line", {{"down.in", kInfinite, {}}, {"down.out", kInfinite, {}}}, 0.0}}};
    PieceSpec par{"P", PieceKind::Parabolic, +1, h, {}, {},
                  {{"bottom", {{"P.bottom", kInfinite, {}}}, 0.0}, {"top", {{"P.top", kInfinite, {}}}, 0.0}}};
    g.pieces = {up, down, par};
    g.identifications = {{"up.out", "P.top"}, {"P.bottom", "down.out"}, {"down.in", "up.in"}};
    return g;
}

// ------------------------------------------------------------ validation

GluingReport validate_gluing(const GluingSpec& spec) {
    GluingReport rep;
    auto fail = [&rep](std::string where, std::string msg) { rep.violations.push_back({std::move(where), std::move(msg)}); };

    struct Info {
        double from, to;
        int orientation;
    };
    std::map<std::string, Info> segs;
    std::set<std::string> ids;
    for (const auto& p : spec.pieces) {
        if (!ids.insert(p.id).second) fail(p.id, "duplicate piece id");
        switch (p.kind) {
            case PieceKind::Strip:
            case PieceKind::Parabolic:
                if (!p.h || !(*p.h > 0)) fail(p.id, "height h must be positive");
                break;
            case PieceKind::HalfCylinder:
                if (!p.r || !(*p.r > 0)) fail(p.id, "circumference r must be positive");
                break;
            case PieceKind::Annulus:
                if (!p.r || !(*p.r > 0)) fail(p.id, "circumference r must be positive");
                if (!p.R || !(*p.R > 1)) fail(p.id, "outer radius R must exceed 1");
                break;
            case PieceKind::HalfPlane:
                if (p.side != 1 && p.side != -1) fail(p.id, "side must be +1 or -1");
                break;
        }
        auto models = boundary_models(p);
        for (const auto& b : p.boundaries) {
            bool known = b.name.empty() && models.size() == 1;
            for (const auto& m : models) known = known || m.name == b.name;
            if (!known) fail(p.id, "unknown boundary '" + b.name + "' for a " + piece_kind_name(p.kind));
        }
        for (const auto& m : models) {
            const BoundarySpec* b = find_boundary(p, m.name);
            const std::string where = p.id + "." + m.name;
            if (!b || b->segments.empty()) {
                fail(where, "boundary has no segments");
                continue;
            }
            const auto& s = b->segments;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!(s[i].length > 0)) fail(s[i].label, "segment length must be positive");
                if (s[i].orientation && *s[i].orientation != m.orientation)
                    fail(s[i].label, "orientation disagrees with the boundary of " + p.id);
                bool last = i + 1 == s.size();
                bool inf = std::isinf(s[i].length);
                switch (m.shape) {
                    case Shape::Line:
                        if ((i == 0 || last) != inf)
                            fail(s[i].label, inf ? "only the first and last segments of a line are infinite"
                                                 : "a line starts and ends with infinite rays");
                        break;
                    case Shape::Ray:
                        if (last != inf)
                            fail(s[i].label, inf ? "only the last segment of a ray is infinite"
                                                 : "a ray ends with an infinite segment");
                        break;
                    case Shape::Circle:
                        if (inf) fail(s[i].label, "circle segments are finite");
                        break;
                }
            }
            if (m.shape == Shape::Circle && p.r) {
                double total = 0.0;
                for (const auto& x : s) total += x.length;
                if (std::isfinite(total) && !lengths_match(total, *p.r))
                    fail(where, "segments cover " + std::to_string(total) + " of a circle of length " +
                                    std::to_string(*p.r));
            }
            auto laid = lay_out(*b, m.shape);
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i].label.empty()) {
                    fail(where, "unlabeled segment");
                    continue;
                }
                if (!segs.emplace(s[i].label, Info{laid[i].from, laid[i].to, m.orientation}).second)
                    fail(s[i].label, "duplicate segment label");
            }
        }
    }

    std::map<std::string, int> uses;
    for (const auto& [a, b] : spec.identifications) {
        const std::string where = a + " ~ " + b;
        auto ia = segs.find(a), ib = segs.find(b);
        if (ia == segs.end()) fail(where, "unknown segment " + a);
        if (ib == segs.end()) fail(where, "unknown segment " + b);
        if (++uses[a] > 1) fail(a, "segment appears in more than one identification");
        if (a != b && ++uses[b] > 1) fail(b, "segment appears in more than one identification");
        if (a == b) fail(where, "segment identified with itself");
        if (ia == segs.end() || ib == segs.end()) continue;
        const Info &x = ia->second, &y = ib->second;
        if (!lengths_match(x.to - x.from, y.to - y.from))
            fail(where, "lengths differ: " + std::to_string(x.to - x.from) + " vs " + std::to_string(y.to - y.from));
        else if (infinite_end(x.from, x.to) != infinite_end(y.from, y.to))
            fail(where, "infinite ends point in different flow directions");
        if (x.orientation == y.orientation) fail(where, "orientations do not match (interiors on the same side)");
    }
    return rep;
}

// ------------------------------------------------------------ surface

int FlatSurface::segment_index(const std::string& label) const {
    for (std::size_t i = 0; i < segments.size(); ++i)
        if (segments[i].label == label) return static_cast<int>(i);
    return -1;
}

int FlatSurface::vertex_of_corner(int corner) const {
    for (std::size_t v = 0; v < vertices.size(); ++v)
        for (int c : vertices[v].corners)
            if (c == corner) return static_cast<int>(v);
    return -1;
}

std::vector<SectorWord> FlatSurface::words() const {
    std::vector<SectorWord> out;
    for (const auto& v : vertices) out.push_back(v.word);
    return out;
}

namespace {

// Segment-end ids: 2 * segment for the start in flow order, 2 * segment + 1
// for the end.
int end_id(int seg, int end) { return 2 * seg + end; }

struct CornerBuilder {
    FlatSurface& s;
    void add(int piece, Letter l, bool ideal, Complex point, int a, int b, int mouth = -1) {
        Corner c;
        c.piece = piece;
        c.letter = l;
        c.ideal = ideal;
        c.point = point;
        c.sides[0] = a;
        c.sides[1] = b;
        c.mouth = mouth;
        s.corners.push_back(c);
    }
};

SectorWord vertex_word(const FlatSurface& s, const Vertex& v) {
    std::vector<Letter> letters;
    for (int c : v.corners) letters.push_back(s.corners[c].letter);
    if (!v.ideal) return SectorWord(letters);
    // Strip ends at an ideal vertex form one parabolic sector, and only when
    // the period around the vertex has a real part (spiralling); otherwise
    // they are absorbed by the neighbouring sectors.
    const double scale = std::max(1.0, std::abs(v.period));
    const bool spiral = std::abs(v.period.real()) > 1e-9 * scale;
    std::vector<Letter> kept;
    bool have_p = false;
    for (Letter l : letters) {
        if (l != Letter::P) {
            kept.push_back(l);
        } else if (spiral && !have_p) {
            kept.push_back(l);
            have_p = true;
        }
    }
    if (kept.empty() && !letters.empty()) return SectorWord({}, "node");
    return SectorWord(kept);
}

}  // namespace

FlatSurface build_surface(const GluingSpec& spec) {
    auto rep = validate_gluing(spec);
    if (!rep.valid())
        throw SurfaceError("gluing spec is invalid: " + rep.violations.front().where + ": " +
                           rep.violations.front().message);
    FlatSurface s;
    s.spec = spec;
    CornerBuilder cb{s};

    for (std::size_t pi = 0; pi < spec.pieces.size(); ++pi) {
        const auto& p = spec.pieces[pi];
        const int piece = static_cast<int>(pi);
        auto models = boundary_models(p);
        std::vector<std::vector<int>> ids(models.size());
        for (std::size_t bi = 0; bi < models.size(); ++bi) {
            const auto& m = models[bi];
            const BoundarySpec& b = *find_boundary(p, m.name);
            auto laid = lay_out(b, m.shape);
            for (std::size_t i = 0; i < b.segments.size(); ++i) {
                Segment seg;
                seg.label = b.segments[i].label;
                seg.piece = piece;
                seg.boundary = static_cast<int>(bi);
                seg.level = m.level;
                seg.from = laid[i].from;
                seg.to = laid[i].to;
                seg.orientation = m.orientation;
                ids[bi].push_back(static_cast<int>(s.segments.size()));
                s.segments.push_back(seg);
            }
            // Finite corners between consecutive segments.
            const auto& sid = ids[bi];
            for (std::size_t i = 0; i + 1 < sid.size(); ++i) {
                const Segment& a = s.segments[sid[i]];
                cb.add(piece, Letter::H, false, {a.to, a.level}, end_id(sid[i], 1), end_id(sid[i + 1], 0));
            }
            if (m.shape == Shape::Circle) {
                const Segment& last = s.segments[sid.back()];
                cb.add(piece, Letter::H, false, {last.to, last.level}, end_id(sid.back(), 1), end_id(sid.front(), 0));
            }
        }
        switch (p.kind) {
            case PieceKind::HalfPlane:
                cb.add(piece, Letter::E, true, {}, end_id(ids[0].back(), 1), end_id(ids[0].front(), 0));
                break;
            case PieceKind::Strip:
                cb.add(piece, Letter::P, true, {}, end_id(ids[0].front(), 0), end_id(ids[1].front(), 0));
                cb.add(piece, Letter::P, true, {}, end_id(ids[0].back(), 1), end_id(ids[1].back(), 1));
                break;
            case PieceKind::Parabolic: {
                Segment mouth;
                mouth.label = p.id + ".mouth";
                mouth.piece = piece;
                mouth.boundary = -1;
                mouth.from = 0.0;
                mouth.to = *p.h;
                mouth.transverse = true;
                const int mi = static_cast<int>(s.segments.size());
                s.segments.push_back(mouth);
                cb.add(piece, Letter::P, false, {0.0, 0.0}, end_id(ids[0].front(), 0), end_id(ids[1].front(), 0), mi);
                cb.add(piece, Letter::P, true, {}, end_id(ids[0].back(), 1), end_id(ids[1].back(), 1));
                break;
            }
            case PieceKind::HalfCylinder:
                cb.add(piece, Letter::C, true, {}, -1, -1);
                break;
            case PieceKind::Annulus:
                break;
        }
    }

    for (const auto& [a, b] : spec.identifications) {
        int ia = s.segment_index(a), ib = s.segment_index(b);
        Segment &x = s.segments[ia], &y = s.segments[ib];
        x.partner = ib;
        y.partner = ia;
        double shift = std::isfinite(x.from) ? y.from - x.from : std::isfinite(x.to) ? y.to - x.to : 0.0;
        if (!std::isfinite(x.from) && !std::isfinite(x.to)) {
            const auto& px = spec.pieces[x.piece];
            const auto& py = spec.pieces[y.piece];
            shift = find_boundary(py, boundary_models(py)[y.boundary].name)->offset -
                    find_boundary(px, boundary_models(px)[x.boundary].name)->offset;
        }
        x.translation = Complex(shift, y.level - x.level);
        y.translation = -x.translation;
    }
    for (std::size_t i = 0; i < s.segments.size(); ++i)
        if (s.segments[i].partner < 0) s.unglued.push_back(static_cast<int>(i));

    // Walk the corners around each vertex: leave a corner through one side,
    // cross to the same end of the partner segment, enter the corner there.
    std::vector<int> side_corner(2 * s.segments.size(), -1);
    for (std::size_t c = 0; c < s.corners.size(); ++c)
        for (int side : s.corners[c].sides)
            if (side >= 0) side_corner[side] = static_cast<int>(c);
    std::vector<bool> seen(s.corners.size(), false);

    auto walk = [&](int start, int exit_slot, std::vector<int>& path, Complex& period) {
        // Returns true if the walk closed up at `start`.
        int c = start, slot = exit_slot;
        for (std::size_t guard = 0; guard <= s.corners.size(); ++guard) {
            int side = s.corners[c].sides[slot];
            if (side < 0) return false;
            const Segment& seg = s.segments[side / 2];
            if (seg.partner < 0) return false;
            period -= seg.translation;
            int next_side = end_id(seg.partner, side % 2);
            int next = side_corner[next_side];
            if (next < 0) throw SurfaceError("segment end of " + s.segments[seg.partner].label + " has no corner");
            if (next == start) return true;
            if (seen[next]) throw SurfaceError("inconsistent cyclic closure at the vertex through " + seg.label);
            seen[next] = true;
            path.push_back(next);
            c = next;
            slot = s.corners[c].sides[0] == next_side ? 1 : 0;
        }
        throw SurfaceError("corner walk did not terminate");
    };

    for (std::size_t c0 = 0; c0 < s.corners.size(); ++c0) {
        if (seen[c0]) continue;
        seen[c0] = true;
        Vertex v;
        v.ideal = s.corners[c0].ideal;
        std::vector<int> forward{static_cast<int>(c0)};
        Complex period{};
        bool closed = walk(static_cast<int>(c0), 1, forward, period);
        if (!closed) {
            std::vector<int> backward;
            Complex back_period{};
            walk(static_cast<int>(c0), 0, backward, back_period);
            std::reverse(backward.begin(), backward.end());
            backward.insert(backward.end(), forward.begin(), forward.end());
            forward = std::move(backward);
            v.open = true;
            period = {};
        }
        for (int c : forward)
            if (s.corners[c].ideal != v.ideal)
                throw SurfaceError("inconsistent cyclic closure: a vertex mixes finite and ideal corners");
        v.corners = std::move(forward);
        v.period = period;
        v.word = vertex_word(s, v);
        s.vertices.push_back(std::move(v));
    }
    return s;
}

// ------------------------------------------------------------ gaps

GapReport detect_gaps(const FlatSurface& s) {
    GapReport rep;
    std::vector<int> corner_vertex(s.corners.size(), -1);
    for (std::size_t v = 0; v < s.vertices.size(); ++v)
        for (int c : s.vertices[v].corners) corner_vertex[c] = static_cast<int>(v);
    // Vertices at the two ends of each segment.
    std::vector<std::array<int, 2>> ends(s.segments.size(), {-1, -1});
    for (std::size_t c = 0; c < s.corners.size(); ++c) {
        for (int side : s.corners[c].sides)
            if (side >= 0) ends[side / 2][side % 2] = corner_vertex[c];
        if (s.corners[c].mouth >= 0) ends[s.corners[c].mouth] = {corner_vertex[c], corner_vertex[c]};
    }

    std::vector<int> finite;
    for (int i : s.unglued) {
        const Segment& seg = s.segments[i];
        if (seg.finite() && seg.length() > 0) finite.push_back(i);
        else rep.infinite_rays.push_back(i);
    }
    const std::size_t nv = s.vertices.size();
    std::vector<std::size_t> rank(nv), parent(nv);
    boost::disjoint_sets<std::size_t*, std::size_t*> sets(rank.data(), parent.data());
    for (std::size_t v = 0; v < nv; ++v) sets.make_set(v);
    for (int i : finite)
        if (ends[i][0] >= 0 && ends[i][1] >= 0) sets.union_set(ends[i][0], ends[i][1]);

    std::map<std::size_t, Gap> groups;
    for (int i : finite) {
        std::size_t key = ends[i][0] >= 0 ? sets.find_set(ends[i][0]) : nv + i;
        groups[key].segments.push_back(i);
    }
    for (auto& [key, g] : groups) {
        std::set<int> vs;
        std::vector<bool> counted(g.segments.size(), false);
        for (std::size_t a = 0; a < g.segments.size(); ++a) {
            int i = g.segments[a];
            for (int v : ends[i])
                if (v >= 0) vs.insert(v);
            if (counted[a]) continue;
            counted[a] = true;
            g.length += s.segments[i].length();
            // The other side of a slit: same end vertices, same length.
            for (std::size_t b = a + 1; b < g.segments.size(); ++b) {
                int j = g.segments[b];
                if (counted[b] || !lengths_match(s.segments[i].length(), s.segments[j].length())) continue;
                auto ei = ends[i], ej = ends[j];
                std::sort(ei.begin(), ei.end());
                std::sort(ej.begin(), ej.end());
                if (ei == ej) {
                    counted[b] = true;
                    break;
                }
            }
        }
        g.vertices.assign(vs.begin(), vs.end());
        rep.gaps.push_back(std::move(g));
    }
    return rep;
}

// ------------------------------------------------------------ geodesics

std::vector<ChartPiece> continue_geodesic(const FlatSurface& s, int piece, Complex start, Complex direction,
                                          double length) {
    if (std::abs(direction) == 0.0) throw std::invalid_argument("geodesic direction is zero");
    const Complex d = direction / std::abs(direction);
    std::vector<ChartPiece> out;
    Complex a = start;
    double left = length;
    for (int guard = 0; guard < 100000 && left > 0; ++guard) {
        const PieceSpec& p = s.spec.pieces.at(piece);
        auto models = boundary_models(p);
        // First boundary crossing ahead.
        double t_hit = kInfinite;
        int hit_boundary = -1;
        for (std::size_t bi = 0; bi < models.size(); ++bi) {
            if (d.imag() == 0.0) continue;
            double t = (models[bi].level - a.imag()) / d.imag();
            // Only boundaries approached from the interior count.
            bool inward = models[bi].orientation > 0 ? d.imag() < 0 : d.imag() > 0;
            if (inward && t > 1e-15 && t < t_hit) {
                t_hit = t;
                hit_boundary = static_cast<int>(bi);
            }
        }
        bool mouth = false;
        if (p.kind == PieceKind::Parabolic && d.real() < 0) {
            double t = -a.real() / d.real();
            if (t > 1e-15 && t < t_hit) {
                t_hit = t;
                mouth = true;
            }
        }
        if (t_hit >= left) {
            out.push_back({piece, a, a + left * d});
            break;
        }
        Complex q = a + t_hit * d;
        out.push_back({piece, a, q});
        left -= t_hit;
        if (mouth || hit_boundary < 0) break;
        const auto& m = models[hit_boundary];
        double x = q.real();
        if (m.shape == Shape::Circle) {
            const BoundarySpec& b = *find_boundary(p, m.name);
            x = b.offset + std::fmod(std::fmod(x - b.offset, *p.r) + *p.r, *p.r);
        }
        int crossing = -1;
        for (std::size_t i = 0; i < s.segments.size(); ++i) {
            const Segment& seg = s.segments[i];
            if (seg.piece != piece || seg.boundary != hit_boundary) continue;
            const double tol = 1e-12 * std::max(1.0, std::abs(x));
            if ((std::isfinite(seg.from) && std::abs(x - seg.from) <= tol) ||
                (std::isfinite(seg.to) && std::abs(x - seg.to) <= tol))
                return out;  // through a corner
            if (x > seg.from && x < seg.to) crossing = static_cast<int>(i);
        }
        if (crossing < 0 || s.segments[crossing].partner < 0) break;
        const Segment& seg = s.segments[crossing];
        a = Complex(x, q.imag()) + seg.translation;
        piece = s.segments[seg.partner].piece;
    }
    return out;
}

// ------------------------------------------------------------ words

CyclicWord CyclicWord::parse(const std::string& text) {
    CyclicWord w;
    if (text == "node") {
        w.tag = "node";
        return w;
    }
    auto time_of = [&text](std::string v) {
        v.erase(std::remove_if(v.begin(), v.end(), [](unsigned char c) { return std::isspace(c); }), v.end());
        if (v == "f" || v == "t") return BoundaryTime::Finite;
        if (v == "inf" || v == "\xE2\x88\x9E") return BoundaryTime::Infinite;
        throw std::invalid_argument("bad boundary time '" + v + "' in word " + text);
    };
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '.' || c == '*' || c == '\t') {
            ++i;
            continue;
        }
        if (text.compare(i, 2, "\xC2\xB7") == 0) {
            i += 2;
            continue;
        }
        std::size_t len = text.compare(i, 3, "Ent") == 0 ? 3 : 1;
        SectorWord one = SectorWord::parse(text.substr(i, len));
        i += len;
        WordLetter wl{one.letters().front(), std::nullopt};
        int count = 1;
        if (i < text.size() && text[i] == '(') {
            std::size_t close = text.find(')', i);
            std::size_t comma = text.find(',', i);
            if (close == std::string::npos || comma == std::string::npos || comma > close)
                throw std::invalid_argument("bad attribute list in word " + text);
            wl.times = std::pair{time_of(text.substr(i + 1, comma - i - 1)), time_of(text.substr(comma + 1, close - comma - 1))};
            i = close + 1;
        }
        if (i < text.size() && text[i] == '^') {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j == i + 1) throw std::invalid_argument("missing exponent in word " + text);
            count = std::stoi(text.substr(i + 1, j - i - 1));
            i = j;
        }
        for (int k = 0; k < count; ++k) w.letters.push_back(wl);
    }
    return w;
}

CyclicWord CyclicWord::from(const SectorWord& sw) {
    CyclicWord w;
    w.tag = sw.tag();
    for (Letter l : sw.letters()) w.letters.push_back({l, std::nullopt});
    return w;
}

SectorWord CyclicWord::bare() const {
    std::vector<Letter> l;
    for (const auto& x : letters) l.push_back(x.letter);
    return SectorWord(std::move(l), tag);
}

std::string CyclicWord::str() const {
    if (letters.empty()) return tag;
    std::string s;
    for (const auto& x : letters) {
        s += letter_name(x.letter);
        if (x.times) {
            auto name = [](BoundaryTime t) { return t == BoundaryTime::Finite ? "f" : "inf"; };
            s += std::string("(") + name(x.times->first) + "," + name(x.times->second) + ")";
        }
    }
    return s;
}

namespace {

// A junction between consecutive sectors is one boundary trajectory: its time
// to the singular point and whether it runs in or out.
struct Junction {
    BoundaryTime time;
    bool incoming;
    int key() const { return (time == BoundaryTime::Infinite ? 2 : 0) + (incoming ? 1 : 0); }
};

struct Config {
    Junction left, right;
};

std::vector<Config> configs(const WordLetter& w) {
    using BT = BoundaryTime;
    std::vector<std::pair<BT, BT>> times;
    if (w.times) {
        times = {*w.times};
    } else {
        switch (w.letter) {
            case Letter::H: times = {{BT::Finite, BT::Finite}}; break;
            case Letter::E: times = {{BT::Infinite, BT::Infinite}}; break;
            // Reached in finite time once the flow is reparametrized, in
            // infinite time in the focus model: either, equal on both sides.
            case Letter::P: times = {{BT::Infinite, BT::Infinite}, {BT::Finite, BT::Finite}}; break;
            case Letter::Ent: times = {{BT::Finite, BT::Infinite}, {BT::Infinite, BT::Finite}}; break;
            case Letter::C: break;
        }
    }
    std::vector<Config> out;
    for (auto [l, r] : times)
        for (bool in : {true, false}) {
            // Parabolic sectors keep the direction across; the others reverse it.
            bool out_dir = w.letter == Letter::P ? in : !in;
            out.push_back({{l, in}, {r, out_dir}});
        }
    return out;
}

}  // namespace

WordCheck validate_word(const CyclicWord& w) {
    WordCheck rep;
    if (w.letters.empty()) {
        if (w.tag != "node" && !w.tag.empty()) rep.message = "word " + w.tag;
        return rep;
    }
    for (std::size_t i = 0; i < w.letters.size(); ++i) {
        if (w.letters[i].letter == Letter::C && w.letters.size() > 1) {
            rep.valid = false;
            rep.first_violation = i;
            rep.message = "a center has no boundary trajectories to paste";
            return rep;
        }
    }
    if (w.letters.size() == 1 && w.letters[0].letter == Letter::C) return rep;

    // Reachable junction states from each start state, letter by letter.
    const std::size_t n = w.letters.size();
    std::vector<std::vector<Config>> cfg;
    for (const auto& l : w.letters) cfg.push_back(configs(l));
    std::size_t dead_at = 0;
    bool survived = false, closes = false;
    for (int s0 = 0; s0 < 4; ++s0) {
        std::array<bool, 4> state{};
        state[s0] = true;
        bool alive = true;
        for (std::size_t i = 0; i < n && alive; ++i) {
            std::array<bool, 4> next{};
            alive = false;
            for (const auto& c : cfg[i])
                if (state[c.left.key()]) next[c.right.key()] = alive = true;
            state = next;
            if (!alive) dead_at = std::max(dead_at, i);
        }
        survived = survived || alive;
        closes = closes || (alive && state[s0]);
    }
    if (closes) return rep;
    rep.valid = false;
    if (survived) {
        rep.first_violation = n - 1;
        rep.message = "the last sector cannot be pasted to the first";
    } else {
        rep.first_violation = dead_at;
        rep.message = "sector " + std::to_string(dead_at) + " (" + letter_name(w.letters[dead_at].letter) +
                      ") cannot be pasted to its predecessor";
    }
    return rep;
}

GermSummary word_to_germ(const CyclicWord& w) {
    auto check = validate_word(w);
    if (!check.valid) throw WordError("invalid word " + w.str() + ": " + check.message);
    GermSummary g;
    if (w.letters.empty()) {
        if (w.tag != "node") throw WordError("empty word");
        g.kind = "zero";
        g.order = 1;
        g.lambda = "R";
        g.description = "simple zero, lambda real (node)";
        return g;
    }
    std::map<Letter, int> count;
    for (const auto& l : w.letters) ++count[l.letter];
    const int n = static_cast<int>(w.letters.size());
    if (count[Letter::Ent] > 0) {
        g.kind = "essential";
        g.description = count[Letter::Ent] == n ? "essential singularity of exponential type" : "essential singularity";
        return g;
    }
    if (count[Letter::H] == n) {
        int k = (n - 2) / 2;
        g.kind = k == 0 ? "regular" : "pole";
        g.order = k;
        g.description = k == 0 ? "regular point" : "pole of order " + std::to_string(k);
        return g;
    }
    if (n == 1 && count[Letter::C] == 1) {
        g.kind = "zero";
        g.order = 1;
        g.lambda = "iR*";
        g.description = "simple zero, lambda imaginary (center)";
        return g;
    }
    if (count[Letter::E] == n && n % 2 == 0) {
        g.kind = "zero";
        g.order = n / 2 + 1;
        g.lambda = "R";
        g.description = "zero of order " + std::to_string(*g.order) + ", lambda real";
        return g;
    }
    if (count[Letter::P] == 1 && count[Letter::E] == n - 1 && (n - 1) % 2 == 0) {
        g.kind = "zero";
        g.order = (n - 1) / 2 + 1;
        g.lambda = "C\\R";
        g.description = "zero of order " + std::to_string(*g.order) + ", lambda not real";
        return g;
    }
    g.kind = "beyond normal forms";
    g.description = "no pole or zero has this word";
    return g;
}

}  // namespace holoflow
