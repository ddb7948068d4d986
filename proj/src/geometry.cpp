#include "holoflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace holoflow {

PathSpec PathSpec::circle(Complex center, double radius, int n) {
    std::vector<Complex> pts;
    pts.reserve(n + 1);
    for (int k = 0; k < n; ++k) pts.push_back(center + std::polar(radius, 2.0 * std::numbers::pi * k / n));
    pts.push_back(pts.front());
    return PathSpec(std::move(pts));
}

double PathSpec::euclidean_length() const {
    double len = 0.0;
    for (std::size_t k = 1; k < waypoints.size(); ++k) len += std::abs(waypoints[k] - waypoints[k - 1]);
    return len;
}

double distance_to_segment(Complex p, Complex a, Complex b) {
    Complex d = b - a;
    double L2 = std::norm(d);
    if (L2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(d)).real() / L2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

void PathSpec::validate(const std::vector<Complex>& avoid, double margin) const {
    if (waypoints.size() < 2) throw std::invalid_argument("path needs at least two waypoints");
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
        if (waypoints[k] == waypoints[k - 1])
            throw std::invalid_argument("consecutive waypoints coincide at index " + std::to_string(k));
        for (Complex s : avoid)
            if (distance_to_segment(s, waypoints[k - 1], waypoints[k]) < margin)
                throw std::invalid_argument("path passes within margin of a singularity");
    }
}

}  // namespace holoflow
