#include "holoflow/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace holoflow {

namespace gk = boost::math::quadrature;

QuadResult integrate_segment(const ComplexFn& f, Complex a, Complex b, double abs_tol) {
    Complex d = b - a;
    auto g = [&](double t) { return f(a + t * d) * d; };
    double err = 0.0;
    Complex v = gk::gauss_kronrod<double, 15>::integrate(g, 0.0, 1.0, 18, 1e-13, &err);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw QuadratureError("non-finite integrand on segment (path too close to a singularity)");
    if (err > abs_tol && err > 1e-12 * std::abs(v))
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, "quadrature did not converge (error estimate %.3g, tolerance %.3g)", err, abs_tol);
        throw QuadratureError(buf);
    }
    return {v, err};
}

Complex integrate_segment_gauss(const ComplexFn& f, Complex a, Complex b) {
    Complex d = b - a;
    auto g = [&](double t) { return f(a + t * d) * d; };
    return boost::math::quadrature::gauss<double, 30>::integrate(g, 0.0, 1.0);
}

QuadResult integrate_path(const ComplexFn& f, const PathSpec& path, double abs_tol) {
    QuadResult total;
    std::size_t n = path.waypoints.size();
    double per = n > 1 ? abs_tol / static_cast<double>(n - 1) : abs_tol;
    for (std::size_t k = 1; k < n; ++k) {
        auto r = integrate_segment(f, path.waypoints[k - 1], path.waypoints[k], std::max(per, 1e-13));
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

double integrate_real(const std::function<double(double)>& g, double a, double b, double rel_tol) {
    double err = 0.0;
    return gk::gauss_kronrod<double, 15>::integrate(g, a, b, 15, rel_tol, &err);
}

}  // namespace holoflow
