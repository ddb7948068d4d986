#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "holoflow/field.hpp"
#include "holoflow/geometry.hpp"

namespace holoflow {

enum class Letter { H, E, P, C, Ent };

// Cyclic word over {H, E, P, C, Ent}; equality is up to rotation.
class SectorWord {
public:
    SectorWord() = default;
    explicit SectorWord(std::vector<Letter> letters, std::string tag = {});
    static SectorWord repeat(Letter l, int n);
    // Accepts letters with optional separators, e.g. "HPH", "EEP", "Ent Ent".
    static SectorWord parse(const std::string& text);

    const std::vector<Letter>& letters() const { return letters_; }
    // Non-empty for words outside the alphabet: "node", "unclassified-essential".
    const std::string& tag() const { return tag_; }
    std::size_t size() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }
    std::string str() const;
    SectorWord concat(const SectorWord& o) const;
    bool operator==(const SectorWord& o) const;

private:
    std::vector<Letter> letters_;
    std::string tag_;
};

std::string letter_name(Letter l);

enum class SingularityKind { Zero, Pole, Regular, Essential };
std::string kind_name(SingularityKind k);

struct Singularity {
    std::optional<Complex> location;  // empty: the point at infinity
    SingularityKind kind = SingularityKind::Regular;
    int order = 0;                    // s >= 1 zeros, -k poles, 0 regular; unused when essential
    Complex residue{};                // residue of dz/h at the point
    std::optional<Complex> lambda;    // zeros only
    SectorWord word;
    std::string method;
    bool at_infinity() const { return !location.has_value(); }
};

class ContourError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ContourOptions {
    double r0 = 1e-3;
    int nodes = 256;
    int halvings = 5;
    // Other known singular points; the radius shrinks to stay clear of them.
    std::vector<Complex> neighbors;
};

struct LocateOptions {
    int grid = 200;
    double dedup = 1e-6;
};

struct LocateResult {
    std::vector<Singularity> points;  // location, kind and a provisional order
    std::vector<std::string> warnings;
};

LocateResult locate_singularities(const FieldExpr& h, const Window& window, const LocateOptions& opt = {});

// Winding number of h on a small circle (argument principle).
int order_of(const FieldExpr& h, Complex z0, const ContourOptions& opt = {});
// (1/2 pi i) of the contour integral of dz/h.
Complex residue_invariant(const FieldExpr& h, Complex z0, const ContourOptions& opt = {});
// Linearization data: 1/residue for simple zeros, -residue for higher zeros.
std::optional<Complex> lambda_from(int order, Complex residue);

// Normal-form sector word for a point whose order and residue are filled in.
SectorWord classify(const FieldExpr& h, const Singularity& sing);

// Full local analysis at a finite point.
Singularity analyze_point(const FieldExpr& h, Complex z0, const ContourOptions& opt = {});
// Local analysis of the chart at infinity.
Singularity analyze_infinity(const FieldExpr& h);
SectorWord word_at_infinity(const FieldExpr& h);

// locate + analyze for every point in the window.
struct SingularityCensus {
    std::vector<Singularity> finite;
    Singularity infinity;
    std::vector<std::string> warnings;
};
SingularityCensus analyze_singularities(const FieldExpr& h, const Window& window, const LocateOptions& opt = {});

// Numeric gates on lambda.
bool is_purely_imaginary(Complex lambda);
bool is_real(Complex lambda);

}  // namespace holoflow
