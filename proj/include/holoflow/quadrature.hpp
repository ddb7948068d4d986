#pragma once

#include <functional>
#include <stdexcept>

#include "holoflow/geometry.hpp"

namespace holoflow {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadResult {
    Complex value{};
    double error = 0.0;  // estimated absolute error
};

using ComplexFn = std::function<Complex(Complex)>;

// Adaptive Gauss-Kronrod (7/15) of f(z) dz along the straight segment a -> b.
// Throws QuadratureError when the estimate stays above abs_tol.
QuadResult integrate_segment(const ComplexFn& f, Complex a, Complex b, double abs_tol = 1e-11);

// Fixed 30-point Gauss-Legendre rule, for short segments with a smooth integrand.
Complex integrate_segment_gauss(const ComplexFn& f, Complex a, Complex b);

// Sum over the segments of a piecewise-linear path.
QuadResult integrate_path(const ComplexFn& f, const PathSpec& path, double abs_tol = 1e-10);

// Real line integral of g(t) over [a, b] with the same rule.
double integrate_real(const std::function<double(double)>& g, double a, double b, double rel_tol = 1e-12);

}  // namespace holoflow
