#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "holoflow/dictionary.hpp"
#include "holoflow/singularity.hpp"
#include "holoflow/trajectory.hpp"

namespace holoflow {

class HolonomyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Segment sigma(s) = base + s * direction, s in [0, length).
struct Transversal {
    Vec2 base;
    Vec2 direction{1, 0};  // normalized on use
    double length = 0.1;
    // Parameter grid; empty uses the dyadic grid length * 2^-j.
    std::vector<double> samples;

    Vec2 unit() const;
    Vec2 at(double s) const;
    double param(Vec2 p) const;     // projection onto the direction
    double offset(Vec2 p) const;    // signed distance from the line
    std::vector<double> grid(int levels) const;
    // Smallest |cross(direction, X)| / |X| over the grid and the base point.
    double transversality(const PlanarField& X, int levels) const;
};

enum class HolonomyVerdict { DiffeoConsistent, NonC1, Inconclusive };
std::string holonomy_verdict_name(HolonomyVerdict v);

struct HolonomySample {
    double s = 0.0;
    std::optional<double> hol;  // empty when the crossing failed
    double arc = 0.0;           // euclidean length of the orbit piece
    bool flat = false;          // image below the representable range
    std::string failure;
};

struct HolonomyOptions {
    int levels = 6;               // dyadic samples; the verdict reads the last five
    double crossing_tol = 1e-10;
    double rtol = 1e-12;
    double arc_budget = 1e4;
    double escape_radius = 1e6;
    int direction = 0;            // +1 forward, -1 backward, 0 chosen from the first sample
    double ratio_tol = 0.05;      // |D_{j+1}/D_j - 1| band of a converging quotient
    double derivative_bound = 1e8;
};

struct HolonomyReport {
    std::vector<HolonomySample> samples;            // in grid order, s decreasing
    std::vector<double> quotients;                  // hol(s)/s
    std::vector<double> ratios;                     // consecutive quotient ratios
    std::array<std::optional<double>, 3> derivatives;  // at s -> 0+
    // Richardson rows of the first derivative, finest last.
    std::vector<double> first_derivative_table;
    int direction = 1;
    double transversality = 0.0;
    HolonomyVerdict verdict = HolonomyVerdict::Inconclusive;
    std::string reason;
};

// Flow of X from sigma1(s) to its first crossing of sigma2, orbit by orbit.
// The map only depends on the foliation, so orbits are integrated at unit
// speed. Throws HolonomyError when a transversal is tangent to X.
HolonomyReport holonomy_map(const PlanarField& X, const Transversal& sigma1, const Transversal& sigma2,
                            const HolonomyOptions& opt = {});

// ---- Periodic orbits.

struct ReturnOptions {
    double half_width = 0.05;   // section is seed + s n, |s| <= half_width
    int samples = 9;
    double rtol = 1e-12;
    double crossing_tol = 1e-12;
    double arc_budget = 1e4;
    double escape_radius = 1e6;
    double closure_tol = 1e-6;  // the seed orbit itself must return this close
};

struct FirstReturnReport {
    Vec2 seed;
    Vec2 normal;
    std::vector<std::pair<double, double>> map;  // (s, P(s))
    double max_deviation = 0.0;
    double orbit_length = 0.0;                   // euclidean, through the seed
};

// Poincare map on the normal section through `seed`. Throws HolonomyError
// when the orbit does not come back within the budget or does not close.
FirstReturnReport first_return_map(const PlanarField& X, Vec2 seed, const ReturnOptions& opt = {});

// ---- Global flow box candidates: Psi with d Psi(rho X) = (1, 0).

struct FlowBoxCandidate {
    ScalarField rho;
    ScalarField psi1, psi2;
};
struct FlowBoxCheck {
    double max_residual = 0.0;
    int samples = 0;
    std::vector<std::pair<Vec2, double>> residuals;
};
FlowBoxCheck flow_box_residual(const PlanarField& X, const FlowBoxCandidate& c, const std::vector<Vec2>& points);

// ---- Admissibility of a field for an adapted complex structure.

enum class ConditionVerdict { Pass, Fail, Inconclusive };
std::string condition_verdict_name(ConditionVerdict v);

struct SectorProbe {
    std::string name;
    Transversal in, out;
};

struct SectorResult {
    std::string name;
    HolonomyReport report;
};
struct ReturnResult {
    Vec2 seed;
    std::optional<FirstReturnReport> report;
    std::string error;
};
struct WordResult {
    std::string where;
    SectorWord word;
    std::optional<SectorWord> expected;  // H^{2k+2} for multi-saddles
    bool ok = true;
};

struct Condition {
    std::string name;
    ConditionVerdict verdict = ConditionVerdict::Inconclusive;
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<Condition> conditions;  // separatrices, first returns, sectors, words
    std::optional<Condition> flow_box;  // a global flow box decides on its own
    std::vector<SectorResult> sectors;
    std::vector<ReturnResult> returns;
    std::vector<WordResult> words;
    std::optional<FlowBoxCheck> flow_box_check;
    ConditionVerdict verdict = ConditionVerdict::Inconclusive;
    bool admissible() const { return verdict == ConditionVerdict::Pass; }
};

struct AdmissibilityInput {
    PlanarField X;
    std::vector<SectorProbe> sectors;
    std::vector<Vec2> periodic_seeds;
    std::vector<WordResult> words;
    std::optional<bool> separatrices_finite;  // empty: unknown
    std::optional<FlowBoxCandidate> flow_box;
    std::vector<Vec2> flow_box_points;
    HolonomyOptions holonomy;
    ReturnOptions returns;
};

AdmissibilityReport admissibility_report(const AdmissibilityInput& in);

// For X = Re(h d/dz): sectors at every pole of the skeleton, returns at its
// centers and pole words against H^{2k+2}.
AdmissibilityReport admissibility_report(const FieldExpr& h, const Skeleton& skeleton,
                                         const HolonomyOptions& opt = {});

// ---- Named planar fields with their probes.

struct BuiltinField {
    std::string name;
    std::string description;
    std::map<std::string, double> params;
    AdmissibilityInput input;
    std::optional<ScalarField> first_integral;
    ProbeRegion probe;
};

std::vector<std::string> builtin_names();
// Unknown names and parameters throw std::invalid_argument.
BuiltinField builtin_field(const std::string& name, const std::map<std::string, double>& params = {});
// Linear saddle x d/dx - lambda y d/dy with the sector of the first quadrant.
BuiltinField linear_saddle(double lambda);

}  // namespace holoflow
