#include "holoflow/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace holoflow::ode {

namespace {

using State = std::array<double, 3>;  // x, y, tau

struct Rhs {
    const Velocity& field;
    double dir;

    // Returns false on a non-finite velocity.
    bool operator()(const State& y, State& dy, Complex* v_out = nullptr) const {
        Complex v = dir * field(Complex(y[0], y[1]));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        double n = std::hypot(1.0, std::abs(v));
        dy = {v.real() / n, v.imag() / n, dir / n};
        if (v_out) *v_out = v;
        return true;
    }
};

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 - (-92097.0 / 339200), e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

struct StepOut {
    State y;
    State k7;
    State err;
    bool ok;
};

StepOut dp_step(const Rhs& f, const State& y, const State& k1, double h) {
    StepOut out{};
    State k2, k3, k4, k5, k6, t;
    auto comb = [&](std::initializer_list<std::pair<double, const State*>> terms) {
        for (int i = 0; i < 3; ++i) {
            double s = y[i];
            for (auto& [c, k] : terms) s += h * c * (*k)[i];
            t[i] = s;
        }
        return t;
    };
    out.ok = f(comb({{a21, &k1}}), k2) && f(comb({{a31, &k1}, {a32, &k2}}), k3) &&
             f(comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}), k4) &&
             f(comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), k5) &&
             f(comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), k6);
    if (!out.ok) return out;
    out.y = comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    out.ok = f(out.y, out.k7);
    if (!out.ok) return out;
    for (int i = 0; i < 3; ++i)
        out.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * out.k7[i]);
    return out;
}

Sample make_sample(const Rhs& f, double sigma, const State& y) {
    Sample s;
    s.sigma = sigma;
    s.z = Complex(y[0], y[1]);
    s.tau = y[2];
    State dy;
    f(y, dy, &s.v);
    return s;
}

}  // namespace

Result integrate(const Velocity& field, Complex z0, const Options& opt, const std::vector<Event>& user_events) {
    std::vector<Event> events = user_events;
    const bool has_tau_event = opt.tau_limit < 1e299;
    if (has_tau_event) {
        double T = opt.tau_limit;
        Event te;
        te.g = [T](Complex, double tau) { return std::abs(tau) - T; };
        te.direction = +1;
        te.tolerance = 1e-13 * std::max(1.0, T);
        events.push_back(te);
    }
    Rhs f{field, opt.direction >= 0 ? 1.0 : -1.0};
    Result res;
    State y{z0.real(), z0.imag(), 0.0};
    State k1;
    if (!f(y, k1)) {
        res.stop = Stop::NonFinite;
        res.message = "non-finite velocity at the initial point";
        res.samples.push_back({0.0, 0.0, z0, Complex(NAN, NAN)});
        return res;
    }
    double sigma = 0.0;
    Sample cur = make_sample(f, sigma, y);
    res.samples.push_back(cur);

    std::vector<double> gprev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].g(cur.z, cur.tau);

    double h = std::min(opt.initial_step, opt.max_step);
    std::size_t steps = 0;
    while (true) {
        if (++steps > opt.max_steps) {
            res.stop = Stop::MaxSteps;
            res.message = "step budget exhausted";
            break;
        }
        if (sigma + h > opt.sigma_limit) h = opt.sigma_limit - sigma;
        StepOut s = dp_step(f, y, k1, h);
        if (!s.ok) {
            h *= 0.25;
            if (h < 1e-15 * (1.0 + std::abs(sigma))) {
                res.stop = Stop::NonFinite;
                res.message = "non-finite velocity ahead of the last good state";
                break;
            }
            continue;
        }
        // Position error is measured against the step displacement, so the
        // relative accuracy holds all the way into a zero of the field.
        double err = 0.0;
        const double moved = std::hypot(s.y[0] - y[0], s.y[1] - y[1]);
        for (int i = 0; i < 3; ++i) {
            double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(s.y[i]));
            if (i < 2) sc = opt.atol + opt.rtol * moved;
            err = std::max(err, std::abs(s.err[i]) / sc);
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < 1e-15 * (1.0 + std::abs(sigma))) {
                res.stop = Stop::StepUnderflow;
                res.message = "step size underflow";
                break;
            }
            continue;
        }

        // Accepted step.
        State ynew = s.y;
        double snew = sigma + h;
        Sample next = make_sample(f, snew, ynew);
        // A smooth flow cannot turn back within one accepted step; this only
        // happens when the step jumps across a singular point.
        if ((next.v * std::conj(cur.v)).real() < 0.0) {
            res.stop = Stop::Reversal;
            res.message = "velocity reversed across one step";
            break;
        }

        // Event detection against the new state.
        int hit = -1;
        Sample hit_sample;
        double hit_frac = 2.0;
        for (std::size_t e = 0; e < events.size(); ++e) {
            double g1 = events[e].g(next.z, next.tau);
            double g0 = gprev[e];
            bool up = g0 < 0.0 && g1 >= 0.0, down = g0 > 0.0 && g1 <= 0.0;
            bool crossed = (events[e].direction > 0 && up) || (events[e].direction < 0 && down) ||
                           (events[e].direction == 0 && (up || down));
            if (!crossed) continue;
            // Regula falsi (Illinois) on the step length, re-stepping from y.
            double lo = 0.0, hi = h, glo = g0, ghi = g1;
            Sample located = next;
            int side = 0;
            for (int it = 0; it < 80; ++it) {
                double m = (glo * hi - ghi * lo) / (glo - ghi);
                if (!(m > lo && m < hi)) m = 0.5 * (lo + hi);
                StepOut sm = dp_step(f, y, k1, m);
                if (!sm.ok) {
                    hi = m;
                    continue;
                }
                Sample sm_sample = make_sample(f, sigma + m, sm.y);
                double gm = events[e].g(sm_sample.z, sm_sample.tau);
                located = sm_sample;
                if (std::abs(gm) <= events[e].tolerance || hi - lo <= 1e-15 * h) break;
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = m;
                    glo = gm;
                    if (side == -1) ghi *= 0.5;
                    side = -1;
                } else {
                    hi = m;
                    ghi = gm;
                    if (side == 1) glo *= 0.5;
                    side = 1;
                }
            }
            double frac = (located.sigma - sigma) / h;
            if (frac < hit_frac && events[e].on_cross(located)) {
                hit = static_cast<int>(e);
                hit_sample = located;
                hit_frac = frac;
            }
        }
        if (hit >= 0) {
            res.samples.push_back(hit_sample);
            if (has_tau_event && hit == static_cast<int>(events.size()) - 1) {
                res.stop = Stop::TauLimit;
            } else {
                res.stop = Stop::Event;
                res.event_index = hit;
            }
            return res;
        }
        for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].g(next.z, next.tau);

        y = ynew;
        k1 = s.k7;
        sigma = snew;
        cur = next;
        if (opt.keep_samples) res.samples.push_back(cur);

        if (sigma >= opt.sigma_limit) {
            res.stop = Stop::SigmaLimit;
            break;
        }
        double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = std::min(opt.max_step * std::max(1.0, std::abs(cur.z)), h * std::clamp(fac, 0.2, 5.0));
    }
    if (!opt.keep_samples || res.samples.back().sigma != cur.sigma) res.samples.push_back(cur);
    return res;
}

}  // namespace holoflow::ode
