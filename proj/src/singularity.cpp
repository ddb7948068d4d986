#include "holoflow/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace holoflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string fmt_point(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
    return buf;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

// ------------------------------------------------------------ SectorWord

SectorWord::SectorWord(std::vector<Letter> letters, std::string tag)
    : letters_(std::move(letters)), tag_(std::move(tag)) {}

SectorWord SectorWord::repeat(Letter l, int n) { return SectorWord(std::vector<Letter>(std::max(n, 0), l)); }

SectorWord SectorWord::parse(const std::string& text) {
    if (text == "node" || text == "unclassified-essential") return SectorWord({}, text);
    std::vector<Letter> out;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '.' || c == '*' || c == '\t') {
            ++i;
            continue;
        }
        if (text.compare(i, 2, "\xC2\xB7") == 0) {  // middle dot
            i += 2;
            continue;
        }
        Letter l;
        if (text.compare(i, 3, "Ent") == 0) {
            l = Letter::Ent;
            i += 3;
        } else {
            switch (c) {
                case 'H': l = Letter::H; break;
                case 'E': l = Letter::E; break;
                case 'P': l = Letter::P; break;
                case 'C': l = Letter::C; break;
                default: throw std::invalid_argument("bad sector letter '" + std::string(1, c) + "' in word " + text);
            }
            ++i;
        }
        int count = 1;
        if (i < text.size() && text[i] == '^') {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j == i + 1) throw std::invalid_argument("missing exponent in word " + text);
            count = std::stoi(text.substr(i + 1, j - i - 1));
            i = j;
        }
        for (int k = 0; k < count; ++k) out.push_back(l);
    }
    return SectorWord(std::move(out));
}

std::string letter_name(Letter l) {
    switch (l) {
        case Letter::H: return "H";
        case Letter::E: return "E";
        case Letter::P: return "P";
        case Letter::C: return "C";
        case Letter::Ent: return "Ent";
    }
    return "?";
}

std::string SectorWord::str() const {
    if (letters_.empty()) return tag_;
    std::string s;
    for (Letter l : letters_) s += letter_name(l);
    return s;
}

SectorWord SectorWord::concat(const SectorWord& o) const {
    std::vector<Letter> l = letters_;
    l.insert(l.end(), o.letters_.begin(), o.letters_.end());
    return SectorWord(std::move(l), tag_.empty() ? o.tag_ : tag_);
}

bool SectorWord::operator==(const SectorWord& o) const {
    if (tag_ != o.tag_ || letters_.size() != o.letters_.size()) return false;
    const std::size_t n = letters_.size();
    if (n == 0) return true;
    for (std::size_t shift = 0; shift < n; ++shift) {
        bool same = true;
        for (std::size_t k = 0; k < n && same; ++k) same = letters_[k] == o.letters_[(k + shift) % n];
        if (same) return true;
    }
    return false;
}

std::string kind_name(SingularityKind k) {
    switch (k) {
        case SingularityKind::Zero: return "zero";
        case SingularityKind::Pole: return "pole";
        case SingularityKind::Regular: return "regular";
        case SingularityKind::Essential: return "essential";
    }
    return "?";
}

bool is_purely_imaginary(Complex lambda) {
    return std::abs(lambda) > 0.0 && std::abs(lambda.real()) <= 1e-9 * std::abs(lambda);
}

bool is_real(Complex lambda) { return std::abs(lambda.imag()) <= 1e-9 * std::abs(lambda); }

// --------------------------------------------------------------- contours

namespace {

struct CircleMean {
    Complex value;     // (1/2 pi i) of the contour integral
    double magnitude;  // largest |f (z - z0)| seen, for roundoff estimates
    bool finite;
};

// Trapezoid rule on a circle; spectrally accurate for functions analytic
// in an annulus around the contour.
template <class F>
CircleMean circle_mean(const F& f, Complex z0, double r, int n) {
    Complex sum{};
    double mag = 0.0;
    for (int k = 0; k < n; ++k) {
        Complex d = std::polar(r, two_pi * (k + 0.5) / n);
        Complex v = f(z0 + d) * d;
        if (!finite(v)) return {Complex{}, 0.0, false};
        sum += v;
        mag = std::max(mag, std::abs(v));
    }
    return {sum / static_cast<double>(n), mag, true};
}

double start_radius(Complex z0, const ContourOptions& opt) {
    double r = opt.r0;
    for (Complex q : opt.neighbors) {
        double d = std::abs(q - z0);
        if (d > 0.0) r = std::min(r, 0.45 * d);
    }
    return r;
}

double neighbor_cap(Complex z0, const ContourOptions& opt) {
    double cap = std::numeric_limits<double>::infinity();
    for (Complex q : opt.neighbors) {
        double d = std::abs(q - z0);
        if (d > 0.0) cap = std::min(cap, 0.45 * d);
    }
    return cap;
}

}  // namespace

int order_of(const FieldExpr& h, Complex z0, const ContourOptions& opt) {
    double r = start_radius(z0, opt);
    auto logderiv = [&h](Complex z) { return h.deriv(z) / h(z); };
    for (int attempt = 0; attempt <= opt.halvings; ++attempt, r *= 0.5) {
        CircleMean a = circle_mean(logderiv, z0, r, opt.nodes);
        if (!a.finite) continue;
        double rounded = std::round(a.value.real());
        double defect = std::abs(a.value - Complex(rounded, 0.0));
        if (defect <= 0.01) return static_cast<int>(rounded);
    }
    throw ContourError("winding number at " + fmt_point(z0) + " did not settle to an integer");
}

Complex residue_invariant(const FieldExpr& h, Complex z0, const ContourOptions& opt) {
    auto omega = [&h](Complex z) { return 1.0 / h(z); };
    double r = start_radius(z0, opt);
    const double cap = neighbor_cap(z0, opt);
    for (int attempt = 0; attempt <= opt.halvings; ++attempt, r *= 0.5) {
        CircleMean a = circle_mean(omega, z0, r, opt.nodes);
        if (!a.finite) continue;
        // High-order zeros make 1/h huge on small circles and the mean
        // loses digits to cancellation; widen while the neighbors allow.
        while (a.magnitude * 1e-15 > 1e-12 * std::max(1.0, std::abs(a.value)) && 2.0 * r <= cap) {
            CircleMean wider = circle_mean(omega, z0, 2.0 * r, opt.nodes);
            if (!wider.finite) break;
            r *= 2.0;
            a = wider;
        }
        CircleMean twice = circle_mean(omega, z0, r, 2 * opt.nodes);
        if (!twice.finite) continue;
        if (std::abs(twice.value - a.value) <= 1e-9 * std::max(1.0, std::abs(a.value)) + 1e-15 * a.magnitude)
            return twice.value;
    }
    throw ContourError("residue contour at " + fmt_point(z0) + " did not converge");
}

std::optional<Complex> lambda_from(int order, Complex residue) {
    if (order == 1) {
        if (residue == Complex{}) return std::nullopt;
        return 1.0 / residue;
    }
    if (order >= 2) return -residue;
    return std::nullopt;
}

// ---------------------------------------------------------- classification

namespace {

std::optional<int> pattern_order_at_infinity(const ExpPattern& p) {
    int d = p.exponent.num.degree() - p.exponent.den.degree();
    if (p.exponent.num.is_zero()) d = -1;
    if (d >= 1) return d;
    return std::nullopt;
}

}  // namespace

SectorWord classify(const FieldExpr& h, const Singularity& sing) {
    switch (sing.kind) {
        case SingularityKind::Regular:
            return SectorWord::repeat(Letter::H, 2);
        case SingularityKind::Pole:
            return SectorWord::repeat(Letter::H, 2 * (-sing.order) + 2);
        case SingularityKind::Essential: {
            if (sing.at_infinity())
                if (auto p = exp_pattern(h))
                    if (auto d = pattern_order_at_infinity(*p)) return SectorWord::repeat(Letter::Ent, 2 * *d);
            return SectorWord({}, "unclassified-essential");
        }
        case SingularityKind::Zero:
            break;
    }
    const int s = sing.order;
    const Complex lambda = sing.lambda.value_or(lambda_from(s, sing.residue).value_or(Complex{}));
    if (s == 1) {
        if (is_purely_imaginary(lambda)) return SectorWord({Letter::C});
        if (is_real(lambda)) return SectorWord({}, "node");
        return SectorWord({Letter::P});
    }
    SectorWord elliptic = SectorWord::repeat(Letter::E, 2 * s - 2);
    if (lambda == Complex{} || is_real(lambda)) return elliptic;
    return elliptic.concat(SectorWord({Letter::P}));
}

Singularity analyze_point(const FieldExpr& h, Complex z0, const ContourOptions& opt) {
    Singularity s;
    s.location = z0;
    s.method = "contour";
    s.order = order_of(h, z0, opt);
    s.kind = s.order > 0 ? SingularityKind::Zero : s.order < 0 ? SingularityKind::Pole : SingularityKind::Regular;
    s.residue = residue_invariant(h, z0, opt);
    // Roundoff-level residues are reported as exact zeros (dz/h holomorphic
    // at poles and regular points, lambda = 0 for z^s normal forms).
    if (std::abs(s.residue) <= (s.kind == SingularityKind::Zero ? 1e-12 : 1e-10)) s.residue = Complex{};
    s.lambda = lambda_from(s.order, s.residue);
    s.word = classify(h, s);
    return s;
}

namespace {

std::vector<Complex> rational_singular_points(const Rational& r) {
    std::vector<Complex> pts;
    for (const auto& root : polynomial_roots(r.num)) pts.push_back(root.value);
    for (const auto& root : polynomial_roots(r.den)) pts.push_back(root.value);
    return pts;
}

}  // namespace

Singularity analyze_infinity(const FieldExpr& h) {
    Singularity inf;  // location empty: infinity
    FieldExpr g = chart_at_infinity(h);

    if (!h.is_rational()) {
        if (auto p = exp_pattern(h)) {
            if (auto d = pattern_order_at_infinity(*p)) {
                inf.kind = SingularityKind::Essential;
                inf.method = "exp-pattern";
                inf.word = SectorWord::repeat(Letter::Ent, 2 * *d);
                return inf;
            }
        }
    }

    ContourOptions opt;
    if (const auto& r = g.rational()) {
        for (Complex q : rational_singular_points(*r))
            if (std::abs(q) > 1e-12) opt.neighbors.push_back(q);
    } else if (auto p = exp_pattern(h)) {
        // Finite singular points of p and of q pulled back to the w chart.
        for (const Rational* part : {&p->prefactor, &p->exponent})
            for (Complex q : rational_singular_points(*part))
                if (std::abs(q) > 1e-12) opt.neighbors.push_back(1.0 / q);
    }
    try {
        Singularity s = analyze_point(g, 0.0, opt);
        if (!g.is_rational()) {
            // Confirm on a smaller circle; accumulating singularities drift.
            ContourOptions half = opt;
            half.r0 = 0.5 * opt.r0;
            if (order_of(g, 0.0, half) != s.order) throw ContourError("unstable order at infinity");
        }
        s.location.reset();
        s.method = "chart";
        return s;
    } catch (const ContourError&) {
        inf.kind = SingularityKind::Essential;
        inf.method = "chart-contour-failed";
        inf.word = SectorWord({}, "unclassified-essential");
        return inf;
    }
}

SectorWord word_at_infinity(const FieldExpr& h) { return analyze_infinity(h).word; }

// ----------------------------------------------------------------- locate

namespace {

struct GridScan {
    const FieldExpr& h;
    double jitter;

    // h at z, nudged off exact zeros and poles so arguments are defined.
    Complex value(Complex& z) const {
        Complex v = h(z);
        for (int k = 0; k < 8 && (!finite(v) || v == Complex{}); ++k) {
            z += std::polar(jitter, 0.7 + k);
            v = h(z);
        }
        return v;
    }

    // Argument increment of h along the straight edge a -> b.
    double increment(Complex a, Complex ha, Complex b, Complex hb, int depth) const {
        double d = std::arg(hb / ha);
        if (std::abs(d) < 1.0 || depth == 0) return d;
        Complex m = 0.5 * (a + b);
        Complex hm = value(m);
        return increment(a, ha, m, hm, depth - 1) + increment(m, hm, b, hb, depth - 1);
    }
};

}  // namespace

LocateResult locate_singularities(const FieldExpr& h, const Window& window, const LocateOptions& opt) {
    LocateResult out;
    if (h.expr().is_constant()) {
        if (h(0.0) == Complex{}) throw std::invalid_argument("h vanishes identically");
        return out;
    }

    if (const auto& r = h.rational()) {
        if (r->num.is_zero()) throw std::invalid_argument("h vanishes identically");
        auto add = [&](const Polynomial& p, bool zero) {
            for (const Root& root : polynomial_roots(p)) {
                if (!window.contains(root.value)) continue;
                if (root.residual > 1e-10 || !root.converged)
                    out.warnings.push_back("root near " + fmt_point(root.value) + " has residual " +
                                           std::to_string(root.residual));
                Singularity s;
                s.location = root.value;
                s.kind = zero ? SingularityKind::Zero : SingularityKind::Pole;
                s.order = zero ? root.multiplicity : -root.multiplicity;
                s.method = "rational-roots";
                out.points.push_back(s);
            }
        };
        add(r->num, true);
        add(r->den, false);
    } else {
        const int n = std::max(opt.grid, 2);
        const double dx = window.width() / n, dy = window.height() / n;
        GridScan scan{h, 1e-3 * std::min(dx, dy)};
        std::vector<Complex> pts((n + 1) * (n + 1)), vals((n + 1) * (n + 1));
        auto at = [n](int i, int j) { return j * (n + 1) + i; };
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                Complex z(window.x0 + i * dx, window.y0 + j * dy);
                vals[at(i, j)] = scan.value(z);
                pts[at(i, j)] = z;
            }
        // Increments along horizontal (i -> i+1) and vertical (j -> j+1) edges.
        std::vector<double> hor(n * (n + 1)), ver((n + 1) * n);
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i < n; ++i)
                hor[j * n + i] = scan.increment(pts[at(i, j)], vals[at(i, j)], pts[at(i + 1, j)], vals[at(i + 1, j)], 10);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= n; ++i)
                ver[j * (n + 1) + i] =
                    scan.increment(pts[at(i, j)], vals[at(i, j)], pts[at(i, j + 1)], vals[at(i, j + 1)], 10);

        const double cell = std::max(dx, dy);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double turn = hor[j * n + i] + ver[j * (n + 1) + i + 1] - hor[(j + 1) * n + i] - ver[j * (n + 1) + i];
                int w = static_cast<int>(std::lround(turn / two_pi));
                if (w == 0) continue;
                Complex start(window.x0 + (i + 0.5) * dx, window.y0 + (j + 0.5) * dy);
                // Multiplicity-aware Newton on h (zeros) or on 1/h (poles).
                Complex z = start;
                bool ok = false;
                for (int it = 0; it < 80; ++it) {
                    Complex hv = h(z), dv = h.deriv(z);
                    if (!finite(hv) || !finite(dv)) break;
                    if (w > 0 && hv == Complex{}) {
                        ok = true;
                        break;
                    }
                    if (dv == Complex{}) break;
                    Complex step = static_cast<double>(std::abs(w)) * hv / dv;
                    z = w > 0 ? z - step : z + step;
                    if (std::abs(z - start) > 2.0 * cell) break;
                    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) {
                        ok = true;
                        break;
                    }
                }
                if (w < 0 && !ok) {
                    // Newton on 1/h lands exactly on the pole when h blows up there.
                    Complex hv = h(z);
                    ok = !finite(hv) && std::abs(z - start) <= 2.0 * cell;
                }
                if (!ok) {
                    out.warnings.push_back("Newton did not converge for the candidate " +
                                           std::string(w > 0 ? "zero" : "pole") + " near " + fmt_point(start));
                    continue;
                }
                if (!window.contains(z)) continue;
                bool dup = false;
                for (const auto& s : out.points) dup = dup || std::abs(*s.location - z) <= opt.dedup;
                if (dup) continue;
                Singularity s;
                s.location = z;
                s.kind = w > 0 ? SingularityKind::Zero : SingularityKind::Pole;
                s.order = w;
                s.method = "grid-newton";
                out.points.push_back(s);
            }
    }
    std::sort(out.points.begin(), out.points.end(), [](const Singularity& a, const Singularity& b) {
        if (a.location->real() != b.location->real()) return a.location->real() < b.location->real();
        return a.location->imag() < b.location->imag();
    });
    return out;
}

SingularityCensus analyze_singularities(const FieldExpr& h, const Window& window, const LocateOptions& opt) {
    SingularityCensus census;
    LocateResult located = locate_singularities(h, window, opt);
    census.warnings = located.warnings;
    for (const auto& cand : located.points) {
        ContourOptions copt;
        for (const auto& other : located.points)
            if (&other != &cand) copt.neighbors.push_back(*other.location);
        try {
            Singularity s = analyze_point(h, *cand.location, copt);
            if (s.order != cand.order)
                census.warnings.push_back("contour order " + std::to_string(s.order) + " differs from located order " +
                                          std::to_string(cand.order) + " at " + fmt_point(*cand.location));
            s.method = cand.method;
            census.finite.push_back(s);
        } catch (const ContourError& e) {
            census.warnings.push_back(e.what());
            census.finite.push_back(cand);
        }
    }
    census.infinity = analyze_infinity(h);
    return census;
}

}  // namespace holoflow
