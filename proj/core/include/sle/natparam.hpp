#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sle/greens.hpp"
#include "sle/loewner.hpp"
#include "sle/sampler.hpp"

namespace sle {

struct UnderResolved : std::runtime_error {
    explicit UnderResolved(const std::string& w) : std::runtime_error(w) {}
};

struct QuadratureDiverged : std::runtime_error {
    explicit QuadratureDiverged(const std::string& w) : std::runtime_error(w) {}
};

struct MapSingularOnTrace : std::runtime_error {
    explicit MapSingularOnTrace(const std::string& w) : std::runtime_error(w) {}
};

// --- Minkowski content --------------------------------------------------------

// eps^{d-2} * Area{z: dist(z, gamma_upto) <= eps, dist(z, dD) >= f(eps)} on an
// axis-aligned raster with cell side eps/4.  f(eps) = sqrt(eps) by default.
double minkowski_content(const TracePolyline& trace, double upto, double eps,
                         const DomainSpec& dom, double f_floor = -1.0);

struct ContentProfile {
    std::vector<double> epsilons;   // decreasing
    std::vector<double> contents;
    std::string f_rule = "sqrt";
    DomainSpec domain;
};

ContentProfile content_profile(const TracePolyline& trace, double upto,
                               std::span<const double> epsilons, const DomainSpec& dom);

void write_content_csv(const std::string& path, const ContentProfile& p,
                       const std::vector<std::pair<std::string, std::string>>& extra_meta = {});

// --- dyadic supermartingale increments ------------------------------------------

struct LQuadOptions {
    int base_radii = 28;
    int base_angles = 20;
    int max_refine = 3;
    double rel_tol = 0.01;
};

// L(s, s+delta) = int_{H_n} |f_s'(w)|^d G^delta(w) dA(w) with the localization
// H_n = {|w| <= delta_n}, delta_n = n 2^{-n/2}; polar midpoint quadrature in
// (log rho, theta), refined until stable.
double l_quadrature(const DrivingPath& driving, size_t s_index, double delta,
                    const PhiTable& table, int n_level, const KappaParams& params,
                    const LQuadOptions& opt = {});

struct ThetaSeries {
    int n_level = 0;
    std::vector<double> times;        // cell right edges j*2^-n
    std::vector<double> increments;   // L over each dyadic cell
    std::vector<double> cumulative;   // Theta^(n) at those times
};

ThetaSeries theta_dyadic(const DrivingPath& driving, double t, int n_level,
                         const PhiTable& table, const KappaParams& params,
                         const LQuadOptions& opt = {});

void write_theta_csv(const std::string& path, const ThetaSeries& s,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta = {});

// --- conformal transport ---------------------------------------------------------

// Stieltjes sum of |F'(gamma(t_j))|^d against length increments; times has one
// more entry than increments and refers to capacity times on the trace.
double transport_theta(const TracePolyline& trace, std::span<const double> times,
                       std::span<const double> increments,
                       const std::function<Complex(Complex)>& map_deriv, double d);

// --- Holder statistic -------------------------------------------------------------

// sup over dyadic pairs in (t1,t2) of |gamma(t)-gamma(s)| / (t-s)^alpha
double holder_statistic(const TracePolyline& trace, double alpha, double t1, double t2);

// quadrature of int G^t(z) dA(z) over H using the phi table (the identity-map
// case of l_quadrature without localization); reference value for the
// Theta mean identity
double integral_green_t(double t, const PhiTable& table, const KappaParams& params,
                        int n_radii = 96, int n_angles = 64);

} // namespace sle
