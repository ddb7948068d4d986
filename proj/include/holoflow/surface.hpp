#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "holoflow/expr.hpp"
#include "holoflow/singularity.hpp"

namespace holoflow {

// Pieces live in their own flow-box chart t, where the flow is d/dt:
//   half-plane   Im t > 0 (side +1) or Im t < 0 (side -1), boundary "line"
//   strip        0 < Im t < h, boundaries "bottom" and "top"
//   half-cylinder Im t > 0 mod r, boundary "circle"
//   annulus      0 < Im t < r log(R) / 2pi mod r, boundaries "inner" and "outer"
//   parabolic    0 < Im t < h, Re t > 0: a strip cut by a transverse mouth
//                of length h that is never glued (the finite-time P sector)
enum class PieceKind { HalfPlane, Strip, HalfCylinder, Annulus, Parabolic };
std::string piece_kind_name(PieceKind k);
std::optional<PieceKind> piece_kind_from_name(const std::string& name);

inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

struct SegmentSpec {
    std::string label;
    double length = kInfinite;
    // +1: the flow runs along the positively oriented boundary (interior on
    // the left); -1 against it. Empty: taken from the piece geometry.
    std::optional<int> orientation;
};

struct BoundarySpec {
    std::string name;
    std::vector<SegmentSpec> segments;  // in flow order
    double offset = 0.0;                // Re t of the first finite breakpoint
};

struct PieceSpec {
    std::string id;
    PieceKind kind = PieceKind::HalfPlane;
    int side = +1;                      // half planes only
    std::optional<double> h, r, R;
    std::vector<BoundarySpec> boundaries;
};

// Segments are glued by the translation that matches their flow times.
struct GluingSpec {
    std::vector<PieceSpec> pieces;
    std::vector<std::pair<std::string, std::string>> identifications;
};

// A cell repeated `copies` times; each link glues a segment of copy n to a
// segment of copy n + 1 (labels get the suffix "#n").
struct PeriodicSpec {
    GluingSpec cell;
    std::vector<std::pair<std::string, std::string>> links;
    bool cyclic = false;  // also link the last copy to the first
};
GluingSpec unroll(const PeriodicSpec& periodic, int copies);

struct Violation {
    std::string where;  // label, label pair or piece id
    std::string message;
};
struct GluingReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};
GluingReport validate_gluing(const GluingSpec& spec);

// 2k+2 half planes alternating sides, each boundary split at 0 into an incoming
// and an outgoing ray; neighbours share a ray ("H<j>.in", "H<j>.out").
GluingSpec pole_gluing(int k);
// Two half planes and a parabolic piece of height h: the outgoing rays of the
// half planes meet the parabolic piece, the incoming rays meet each other.
GluingSpec saddle_node_gluing(double h = 1.0);

class SurfaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Segment {
    std::string label;
    int piece = -1;
    int boundary = 0;        // index among the piece's boundaries
    double level = 0.0;      // Im t of the boundary
    double from = 0.0, to = 0.0;  // Re t, possibly infinite
    int orientation = +1;
    int partner = -1;        // glued segment, -1 if unglued
    Complex translation{};   // t_partner = t + translation on the seam
    bool transverse = false; // parabolic mouth
    double length() const { return to - from; }
    bool finite() const { return std::isfinite(to - from); }
};

struct Corner {
    int piece = -1;
    Letter letter = Letter::H;
    bool ideal = false;      // at Re t = +-inf or Im t = +inf
    Complex point{};         // finite corners: position in the piece chart
    int sides[2] = {-1, -1}; // segment-end ids (2 * segment + end), -1 none
    int mouth = -1;          // parabolic corners: the transverse segment they span
};

struct Vertex {
    std::vector<int> corners;  // in walk order
    SectorWord word;
    bool open = false;         // the walk meets an unglued segment
    bool ideal = false;
    Complex period{};          // accumulated translation around the vertex
};

struct FlatSurface {
    GluingSpec spec;
    std::vector<Segment> segments;
    std::vector<Corner> corners;
    std::vector<Vertex> vertices;
    std::vector<int> unglued;     // segment indices

    int segment_index(const std::string& label) const;
    // Vertex holding the given corner.
    int vertex_of_corner(int corner) const;
    const SectorWord& word_at(int vertex) const { return vertices.at(vertex).word; }
    std::vector<SectorWord> words() const;
};

FlatSurface build_surface(const GluingSpec& spec);

struct Gap {
    std::vector<int> segments;   // unglued finite segments forming one hole
    std::vector<int> vertices;
    double length = 0.0;         // both sides of a slit count once
    std::string hint = "conformal hole";
};
struct GapReport {
    std::vector<Gap> gaps;
    std::vector<int> infinite_rays;  // unglued segments of infinite length
};
GapReport detect_gaps(const FlatSurface& surface);

// Straight segment in the chart of `piece`, continued across glued
// boundaries. Stops early at unglued boundaries and corners.
struct ChartPiece {
    int piece;
    Complex a, b;
};
std::vector<ChartPiece> continue_geodesic(const FlatSurface& surface, int piece, Complex start, Complex direction,
                                          double length);

// ---- Cyclic sector words with boundary-time attributes.

enum class BoundaryTime { Finite, Infinite };

struct WordLetter {
    Letter letter = Letter::H;
    // Fixed (left, right) times; empty uses the model defaults.
    std::optional<std::pair<BoundaryTime, BoundaryTime>> times;
};

struct CyclicWord {
    std::vector<WordLetter> letters;
    std::string tag;  // "node" for the empty word of a real simple zero

    // "HPH", "H(f,f) P(inf,inf) H", "Ent(f,inf) Ent", "node".
    static CyclicWord parse(const std::string& text);
    static CyclicWord from(const SectorWord& w);
    SectorWord bare() const;
    std::string str() const;
};

struct WordCheck {
    bool valid = true;
    std::optional<std::size_t> first_violation;  // index of the offending letter
    std::string message;
};
WordCheck validate_word(const CyclicWord& w);

struct GermSummary {
    std::string kind;          // "pole", "regular", "zero", "essential", "beyond normal forms"
    std::optional<int> order;  // k for poles, s for zeros
    std::string lambda;        // "iR*", "R", "C\\R" for zeros
    std::string description;
};
class WordError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
GermSummary word_to_germ(const CyclicWord& w);

}  // namespace holoflow
