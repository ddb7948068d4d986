#include "holoflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace holoflow::svg {

namespace {

std::string f2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

const char* region_fill(RegionKind k) {
    switch (k) {
    case RegionKind::HalfPlane: return "#dbe9f6";
    case RegionKind::Strip: return "#fde4c2";
    case RegionKind::HalfCylinder: return "#d5eecf";
    case RegionKind::Annulus: return "#e8d9f0";
    case RegionKind::Unresolved: return "#ececec";
    }
    return "#ffffff";
}

struct Frame {
    Window w;
    double size, margin = 40;
    double sx(double x) const { return margin + (x - w.x0) / w.width() * size; }
    double sy(double y) const { return margin + (w.y1 - y) / w.height() * size; }
};

// Polyline pieces inside the window; breaks at non-finite samples.
void polyline(std::ostringstream& os, const Frame& fr, const Trajectory& t, const char* style) {
    std::vector<std::string> runs;
    std::string cur;
    int count = 0;
    auto flush = [&] {
        if (count >= 2) runs.push_back(cur);
        cur.clear();
        count = 0;
    };
    Window pad = fr.w;
    double px = 0.05 * pad.width(), py = 0.05 * pad.height();
    pad = {pad.x0 - px, pad.y0 - py, pad.x1 + px, pad.y1 + py};
    for (const auto& s : t.samples) {
        if (!std::isfinite(s.z.real()) || !std::isfinite(s.z.imag()) || !pad.contains(s.z)) {
            flush();
            continue;
        }
        cur += (count ? " " : "") + f2(fr.sx(s.z.real())) + "," + f2(fr.sy(s.z.imag()));
        ++count;
    }
    flush();
    for (const auto& r : runs) os << "<polyline points=\"" << r << "\" " << style << "/>\n";
}

}  // namespace

std::string phase_portrait(const FieldExpr& h, const Skeleton& sk, const Decomposition* d,
                           const std::vector<Trajectory>& extra, const PortraitOptions& opt) {
    Frame fr{sk.window, static_cast<double>(opt.size)};
    const double total = opt.size + 2 * fr.margin;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total << "\" height=\"" << total + 30
       << "\" viewBox=\"0 0 " << total << " " << total + 30 << "\">\n";
    os << "<title>" << escape("Re(" + h.source_text() + " d/dz)") << "</title>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<defs><clipPath id=\"plot\"><rect x=\"" << fr.margin << "\" y=\"" << fr.margin << "\" width=\""
       << opt.size << "\" height=\"" << opt.size << "\"/></clipPath></defs>\n";
    os << "<g clip-path=\"url(#plot)\">\n";

    if (d && d->grid > 0) {
        // Each coarse cell takes the label of the fine cell at its corner;
        // row runs merge into rectangles.
        const int n = std::min(d->grid, opt.max_cells);
        const double cw = opt.size / static_cast<double>(n);
        os << "<g shape-rendering=\"crispEdges\" stroke=\"none\">\n";
        for (int j = 0; j < n; ++j) {
            int run_start = 0, run_label = -3;
            auto emit = [&](int end) {
                if (run_label < 0 || run_label >= static_cast<int>(d->regions.size())) return;
                os << "<rect x=\"" << f2(fr.margin + run_start * cw) << "\" y=\""
                   << f2(fr.margin + (n - 1 - j) * cw) << "\" width=\"" << f2((end - run_start) * cw + 0.5)
                   << "\" height=\"" << f2(cw + 0.5) << "\" fill=\"" << region_fill(d->regions[run_label].kind)
                   << "\"/>\n";
            };
            for (int i = 0; i < n; ++i) {
                int fi = i * d->grid / n, fj = j * d->grid / n;
                int label = d->labels[static_cast<std::size_t>(fj) * d->grid + fi];
                if (label != run_label) {
                    emit(i);
                    run_start = i;
                    run_label = label;
                }
            }
            emit(n);
        }
        os << "</g>\n";
    }

    // Sample orbits on a regular seed grid.
    FlowOptions fo = sk.flow;
    fo.window = sk.window;
    fo.measure_length = false;
    fo.rtol = 1e-8;
    os << "<g id=\"samples\">\n";
    for (int a = 0; a < opt.sample_grid; ++a) {
        for (int b = 0; b < opt.sample_grid; ++b) {
            Complex z0(sk.window.x0 + (a + 0.5) / opt.sample_grid * sk.window.width(),
                       sk.window.y0 + (b + 0.5) / opt.sample_grid * sk.window.height());
            for (double span : {opt.sample_tau, -opt.sample_tau}) {
                try {
                    auto t = integrate_real_flow(h, z0, span, sk.theta, fo);
                    polyline(os, fr, t, "fill=\"none\" stroke=\"#8c8c8c\" stroke-width=\"0.8\"");
                } catch (const std::exception&) {
                    // seeds on a singular point are skipped
                }
            }
        }
    }
    for (const auto& t : extra) polyline(os, fr, t, "fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.6\"");
    os << "</g>\n<g id=\"separatrices\">\n";
    for (const auto& c : sk.curves) polyline(os, fr, c.traj, "fill=\"none\" stroke=\"#111111\" stroke-width=\"2.2\"");
    os << "</g>\n<g id=\"singular-points\">\n";
    for (const auto& v : sk.vertices) {
        if (!v.location) continue;
        const Complex p = *v.location;
        const bool pole = v.kind == SingularityKind::Pole;
        os << "<circle cx=\"" << f2(fr.sx(p.real())) << "\" cy=\"" << f2(fr.sy(p.imag())) << "\" r=\"5\" fill=\""
           << (pole ? "white" : "red") << "\" stroke=\"red\" stroke-width=\"2\"><title>"
           << escape(kind_name(v.kind) + " " + v.word.str()) << "</title></circle>\n";
    }
    os << "</g>\n</g>\n";
    os << "<rect x=\"" << fr.margin << "\" y=\"" << fr.margin << "\" width=\"" << opt.size << "\" height=\""
       << opt.size << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fr.margin << "\" y=\"" << f2(total + 10) << "\" font-family=\"sans-serif\" font-size=\"13\">"
       << escape("[" + f2(sk.window.x0) + ", " + f2(sk.window.x1) + "] x [" + f2(sk.window.y0) + ", " +
                 f2(sk.window.y1) + "]   red: zeros, open red: poles, bold: separatrices")
       << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string gluing_net(const FlatSurface& s) {
    const double bw = 260, bh = 150, gap = 30, pad = 20;
    const int cols = std::max(1, std::min<int>(3, static_cast<int>(s.spec.pieces.size())));
    const int rows = (static_cast<int>(s.spec.pieces.size()) + cols - 1) / cols;
    const double W = cols * bw + (cols + 1) * gap, H = rows * (bh + 30) + (rows + 1) * gap;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << " " << H << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t pi = 0; pi < s.spec.pieces.size(); ++pi) {
        const auto& p = s.spec.pieces[pi];
        const double ox = gap + (pi % cols) * (bw + gap), oy = gap + (pi / cols) * (bh + 30 + gap);
        // Horizontal extent: finite breakpoints plus a margin.
        double lo = 0, hi = 0;
        bool any = false;
        for (const auto& g : s.segments) {
            if (g.piece != static_cast<int>(pi) || g.transverse) continue;
            for (double t : {g.from, g.to}) {
                if (!std::isfinite(t)) continue;
                lo = any ? std::min(lo, t) : t;
                hi = any ? std::max(hi, t) : t;
                any = true;
            }
        }
        lo -= 2;
        hi += 2;
        double top = 3.0, bottom = 0.0;
        if (p.kind == PieceKind::HalfPlane && p.side < 0) {
            top = 0.0;
            bottom = -3.0;
        } else if (p.kind == PieceKind::Strip || p.kind == PieceKind::Parabolic) {
            top = p.h.value_or(1.0);
        } else if (p.kind == PieceKind::Annulus) {
            top = p.r.value_or(1.0) * std::log(p.R.value_or(2.0)) / (2 * std::numbers::pi);
        }
        if (p.kind == PieceKind::Parabolic) lo = std::min(lo, -0.5);
        auto X = [&](double t) { return ox + pad + (std::clamp(t, lo, hi) - lo) / (hi - lo) * (bw - 2 * pad); };
        auto Y = [&](double l) { return oy + pad + (top - l) / (top - bottom) * (bh - 2 * pad); };
        os << "<g id=\"" << escape(p.id) << "\">\n<rect x=\"" << f2(ox) << "\" y=\"" << f2(oy) << "\" width=\"" << bw
           << "\" height=\"" << bh << "\" fill=\"#f6f6f6\" stroke=\"#bbbbbb\"/>\n";
        os << "<text x=\"" << f2(ox + 4) << "\" y=\"" << f2(oy + bh + 16)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(p.id + " (" + piece_kind_name(p.kind) + ")")
           << "</text>\n";
        for (const auto& g : s.segments) {
            if (g.piece != static_cast<int>(pi)) continue;
            const bool glued = g.partner >= 0;
            const char* stroke = glued ? "#2a8a2a" : "#d62728";
            const char* dash = glued ? "" : " stroke-dasharray=\"6,3\"";
            double x1, y1, x2, y2;
            if (g.transverse) {
                x1 = x2 = X(0.0);
                y1 = Y(g.from);
                y2 = Y(g.to);
            } else {
                x1 = X(g.from);
                x2 = X(g.to);
                y1 = y2 = Y(g.level);
            }
            os << "<line x1=\"" << f2(x1) << "\" y1=\"" << f2(y1) << "\" x2=\"" << f2(x2) << "\" y2=\"" << f2(y2)
               << "\" stroke=\"" << stroke << "\" stroke-width=\"3\"" << dash << "/>\n";
            const double mx = 0.5 * (x1 + x2), my = 0.5 * (y1 + y2) + (g.level > bottom ? -6 : 14);
            os << "<text x=\"" << f2(mx) << "\" y=\"" << f2(my)
               << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">"
               << escape(g.label + (glued ? " ~ " + s.segments[g.partner].label : "")) << "</text>\n";
            // Flow direction along the boundary.
            if (!g.transverse && std::isfinite(g.from) && std::isfinite(g.to)) {
                double ax = mx + 8, ay = y1;
                os << "<path d=\"M" << f2(ax - 6) << "," << f2(ay - 4) << " L" << f2(ax) << "," << f2(ay) << " L"
                   << f2(ax - 6) << "," << f2(ay + 4) << "\" fill=\"none\" stroke=\"" << stroke << "\"/>\n";
            }
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace holoflow::svg
