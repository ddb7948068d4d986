#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "holoflow/expr.hpp"

namespace holoflow {

struct Window {
    double x0 = -2, y0 = -2, x1 = 2, y1 = 2;

    bool contains(Complex z) const {
        return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
    }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Complex center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    static Window square(double r) { return {-r, -r, r, r}; }
};

// Piecewise-linear path through the waypoints.
struct PathSpec {
    std::vector<Complex> waypoints;

    PathSpec() = default;
    PathSpec(std::initializer_list<Complex> pts) : waypoints(pts) {}
    explicit PathSpec(std::vector<Complex> pts) : waypoints(std::move(pts)) {}

    static PathSpec segment(Complex a, Complex b) { return PathSpec{a, b}; }
    static PathSpec circle(Complex center, double radius, int n = 64);
    bool closed() const { return waypoints.size() > 2 && waypoints.front() == waypoints.back(); }
    double euclidean_length() const;
    // Throws std::invalid_argument when consecutive waypoints coincide or
    // the path passes within `margin` of one of the given points.
    void validate(const std::vector<Complex>& avoid = {}, double margin = 1e-8) const;
};

double distance_to_segment(Complex p, Complex a, Complex b);

}  // namespace holoflow
