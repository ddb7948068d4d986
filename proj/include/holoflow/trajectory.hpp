#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holoflow/field.hpp"
#include "holoflow/geometry.hpp"
#include "holoflow/singularity.hpp"

namespace holoflow {

enum class Verdict {
    CompleteForward,
    CompleteBackward,
    HitsSingularity,
    EscapesFiniteTime,
    WindowTruncated,
};
std::string verdict_name(Verdict v);
inline bool is_incomplete(Verdict v) { return v == Verdict::HitsSingularity || v == Verdict::EscapesFiniteTime; }

struct TrajectoryPoint {
    double tau;
    Complex z;
    Complex v;  // dz/dtau
};

struct Trajectory {
    std::vector<TrajectoryPoint> samples;
    double theta = 0.0;
    int direction = 1;
    Verdict verdict = Verdict::CompleteForward;
    std::optional<Complex> hit_point;   // the singular point reached
    std::optional<double> period;       // closed orbit detected
    bool tends_to_zero = false;         // complete, accumulating on a zero of h
    double gx_length = 0.0;
    std::string note;

    double elapsed() const { return samples.empty() ? 0.0 : samples.back().tau - samples.front().tau; }
    std::vector<Complex> polyline() const;
    // Samples refined along the cubic Hermite interpolant so that no chord is
    // longer than max_gap; `step` receives the sample index each point follows.
    std::vector<Complex> dense_polyline(double max_gap, std::vector<std::size_t>* step = nullptr) const;
};

struct FlowOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    std::vector<Complex> poles;    // capture stops with an incomplete verdict
    std::vector<Complex> zeros;    // capture stops with a complete verdict
    double capture = 1e-6;
    std::optional<Window> window;  // leaving it truncates
    double escape_radius = 1e3;
    double speed_cap = 1e12;
    bool detect_period = true;
    double return_tol = 1e-6;
    std::size_t max_steps = 2'000'000;
    bool keep_samples = true;
    bool measure_length = true;    // fill Trajectory::gx_length
};

// Real trajectory of Re(e^{i theta} h d/dz) from z0 over tau in [0, t_span]
// (t_span < 0 integrates backward).
Trajectory integrate_real_flow(const FieldExpr& h, Complex z0, double t_span, double theta = 0.0,
                               const FlowOptions& opt = {});

// Launch data for the 2k+2 separatrices of a pole of order k (k = 0 is a
// regular point, used for the chart at infinity).
struct SeparatrixLaunch {
    Complex point;
    double angle;
    int direction;      // +1 leaves the pole forward in time
    double tau_offset;  // |tau| from the pole to the launch point
};
std::vector<SeparatrixLaunch> separatrix_launches(const FieldExpr& h, Complex pole, int k, double theta,
                                                  double radius, std::vector<std::string>* warnings = nullptr);

struct SeparatrixOptions {
    double theta = 0.0;
    double launch_radius = 1e-4;
    double tau_budget = 200.0;
    FlowOptions flow;
};
// 2k+2 trajectories from a pole; each starts with the pole itself at tau 0.
std::vector<Trajectory> separatrices_from(const FieldExpr& h, const Singularity& sing,
                                          const SeparatrixOptions& opt = {},
                                          std::vector<std::string>* warnings = nullptr);

struct SkeletonCurve {
    Trajectory traj;
    std::string origin;                // "pole", "infinity", "sweep"
    int start_vertex = -1;             // index into vertices, -2 for infinity, -1 none
    int end_vertex = -1;               // same convention
    bool truncated = false;            // clipped by the window
};

struct SweepStats {
    int seeds = 0;
    int integrations = 0;
    int complete = 0;
    int periodic = 0;
    int hits_singularity = 0;
    int escapes = 0;
    int unexplained_incomplete = 0;    // incomplete seeds off every traced separatrix
    std::vector<int> column_witnesses; // fate changes bisected per grid column
    std::vector<int> row_witnesses;
    std::vector<Complex> witnesses;
};

struct Skeleton {
    double theta = 0.0;
    Window window;
    std::vector<SkeletonCurve> curves;
    std::vector<Singularity> vertices;
    Singularity infinity;
    SweepStats sweep;
    std::vector<std::string> warnings;
    bool heuristic = false;  // curves found by the sweep rather than from poles
    FlowOptions flow;        // capture lists, including roots beyond the window
};

struct SkeletonOptions {
    double theta = 0.0;
    int sweep_grid = 50;
    double sweep_tau = 30.0;
    double curve_tau = 200.0;
    double curve_rtol = 1e-12;  // traced separatrices
    bool sweep = true;
    LocateOptions locate;
};

Skeleton separatrix_skeleton(const FieldExpr& h, const Window& window, const SkeletonOptions& opt = {});

// Flat-metric length: int |dz| / |h| along a polyline.
double gx_length(const FieldExpr& h, const std::vector<Complex>& curve);
// Same along a trajectory, following its cubic Hermite interpolant.
double gx_length(const FieldExpr& h, const Trajectory& traj);

struct Period {
    Complex value;
    bool real;
    bool imaginary;
};
Period period_around(const FieldExpr& h, const PathSpec& loop);

// Winding number of a closed polyline around p.
int winding_number(const std::vector<Complex>& loop, Complex p);

}  // namespace holoflow
