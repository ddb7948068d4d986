#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "holoflow/expr.hpp"

namespace holoflow::ode {

// Planar velocity field written in complex notation; may return non-finite
// values at singular points.
using Velocity = std::function<Complex(Complex)>;

struct Sample {
    double sigma = 0.0;  // regularized parameter
    double tau = 0.0;    // real flow time (signed)
    Complex z;
    Complex v;           // dz/dtau at z (already including the direction sign)
};

// Event functions are evaluated on accepted states; a terminal crossing stops
// the integration at the located point.
struct Event {
    std::function<double(Complex z, double tau)> g;
    int direction = 0;  // +1: g crosses upward, -1: downward, 0: either
    // Called at the located crossing; return true to stop.
    std::function<bool(const Sample&)> on_cross = [](const Sample&) { return true; };
    double tolerance = 1e-12;  // |g| at the located point
};

struct Options {
    double rtol = 1e-9;
    double atol = 1e-12;
    double direction = 1.0;       // +1 forward in tau, -1 backward
    double tau_limit = 1e300;     // stop when |tau| reaches this
    double sigma_limit = 1e300;   // cap on the regularized parameter
    std::size_t max_steps = 2'000'000;
    double initial_step = 1e-3;
    double max_step = 0.5;        // in sigma, scaled by max(1, |z|)
    bool keep_samples = true;
};

enum class Stop { TauLimit, SigmaLimit, Event, NonFinite, StepUnderflow, Reversal, MaxSteps };

struct Result {
    std::vector<Sample> samples;  // first and last always present
    Stop stop = Stop::TauLimit;
    int event_index = -1;
    std::string message;
    Sample last() const { return samples.back(); }
};

// Dormand-Prince 5(4) in the regularized parameter
// dz/dsigma = v/sqrt(1+|v|^2), dtau/dsigma = 1/sqrt(1+|v|^2),
// which is arc length where the field is fast and flow time where it is slow.
Result integrate(const Velocity& field, Complex z0, const Options& opt, const std::vector<Event>& events = {});

}  // namespace holoflow::ode
