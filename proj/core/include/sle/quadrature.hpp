#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace sle {

// Tanh-sinh (double-exponential) quadrature on a finite interval.  Converges
// fast even with mild endpoint singularities such as sin(x)^p near 0 and pi,
// which is exactly what the sin-power normalization integrals need.
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double c = 0.5 * (b - a);
    const double m = 0.5 * (b + a);
    const double pi_half = 1.5707963267948966;
    double best = 0.0;
    double h = 1.0;
    const int max_level = 10;
    // level 0: coarse trapezoid over t in [-3.6, 3.6]
    auto node_sum = [&](double hh, bool odd_only) {
        double s = 0.0;
        const double tmax = 3.6;
        for (double t = odd_only ? hh : 0.0; t <= tmax; t += odd_only ? 2 * hh : hh) {
            double sh = std::sinh(t);
            double x = std::tanh(pi_half * sh);
            double w = pi_half * std::cosh(t) / std::pow(std::cosh(pi_half * sh), 2);
            double term = w * (f(m + c * x) + (t == 0.0 ? 0.0 : f(m - c * x)));
            if (t == 0.0) term = w * f(m);
            s += term;
            if (std::fabs(term) < tol * 1e-3 && t > 1.0) break;
        }
        return s;
    };
    double sum = node_sum(h, false);
    best = c * h * sum;
    for (int lev = 1; lev <= max_level; ++lev) {
        h *= 0.5;
        sum += node_sum(h, true);
        double next = c * h * sum;
        if (std::fabs(next - best) <= tol * std::fabs(next) + 1e-300) {
            return next;
        }
        best = next;
    }
    return best;
}

// integral of sin(x)^p over (0, pi), p > -1
inline double sin_power_integral(double p) {
    if (p <= -1.0) throw std::invalid_argument("sin_power_integral: p <= -1");
    return tanh_sinh([p](double x) { return std::pow(std::sin(x), p); }, 0.0,
                     3.14159265358979323846, 1e-13);
}

// closed form of the same integral, sqrt(pi)*Gamma((p+1)/2)/Gamma(p/2+1);
// kept as an independent cross-check of the quadrature
inline double sin_power_integral_gamma(double p) {
    return std::sqrt(3.14159265358979323846) *
           std::exp(std::lgamma(0.5 * (p + 1.0)) - std::lgamma(0.5 * p + 1.0));
}

} // namespace sle
