#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sle/estimate.hpp"

namespace sle {

using Complex = std::complex<double>;

// --- error signals -------------------------------------------------------

struct SwallowedThisStep : std::runtime_error {
    SwallowedThisStep() : std::runtime_error("point swallowed by the growing slit") {}
};

struct LossOfPrecision : std::runtime_error {
    explicit LossOfPrecision(const std::string& what) : std::runtime_error(what) {}
};

// --- domain types --------------------------------------------------------

// Sampled driving function U on a uniform capacity-time grid.  The Loewner
// chain it generates has hcap exactly a*t_k at grid times by construction.
struct DrivingPath {
    double dt = 0.0;
    double a = 0.0;                 // capacity rate, a = 2/kappa
    std::vector<double> values;     // U_0..U_N with U_0 = 0

    size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
    double horizon() const { return dt * static_cast<double>(steps()); }
    double max_abs() const {
        double m = 0.0;
        for (double u : values) m = std::max(m, std::fabs(u));
        return m;
    }
};

// Per-point record of the forward flow at a marked point z.
// Arrays run over grid indices 0..K; indices at and after swallow_index
// are absent (the arrays simply end).
struct FlowTrajectory {
    Complex z0;
    double dt = 0.0;                  // grid spacing of the generating driving
    std::vector<Complex> zt;          // Z_t(z) = g_t(z) - U_t
    std::vector<double> logderiv;     // log|g_t'(z)|
    std::vector<double> upsilon;      // Im(Z) * exp(-logderiv)
    std::vector<double> ssin;         // Im(Z)/|Z|
    std::optional<size_t> swallow_index;
    bool swallowed_by_floor = false;  // terminated by the upsilon floor

    size_t points() const { return zt.size(); }
};

// Sampled curve gamma(t_k) in the closed half-plane.  times[k] carries the
// capacity time of each point; uniform traces have times[k] = k*dt.
struct TracePolyline {
    double dt = 0.0;
    double kappa = 0.0;
    std::vector<Complex> points;
    std::vector<double> times;

    double max_spacing() const {
        double m = 0.0;
        for (size_t i = 1; i < points.size(); ++i)
            m = std::max(m, std::abs(points[i] - points[i - 1]));
        return m;
    }
};

// One elementary cell of a (possibly nonuniform) piecewise-constant chain.
struct DrivingStep {
    double dt = 0.0;   // capacity-time length of the cell
    double u = 0.0;    // driving value held over the cell
};

// --- elementary maps -----------------------------------------------------

// Exact vertical-slit map over one cell with constant driving u and capacity
// increment h: g(z) = u + sqrt((z-u)^2 + 2h), branch with Im >= 0.
// Returns false (swallowed) when the pre-image lies on the growing slit.
bool slit_step_try(Complex z, double u, double h, Complex& out);
Complex slit_step(Complex z, double u, double h);          // throws SwallowedThisStep
Complex slit_step_deriv(Complex z, double u, double h);    // d/dz of slit_step

// inverse cell map f(w) = u + sqrt((w-u)^2 - 2h), branch with Im >= 0
Complex slit_step_inverse(Complex w, double u, double h);
Complex slit_step_inverse_deriv(Complex w, double u, double h);

// --- flow evaluation -----------------------------------------------------

inline constexpr double kUpsilonFloor = 1e-6;

FlowTrajectory advance_flow(const DrivingPath& driving, Complex z,
                            double upsilon_floor = kUpsilonFloor);

// Lean single-point flow used by the ensemble experiments; identical
// arithmetic to advance_flow but keeps only the running state.
struct FlowState {
    Complex g;          // g_t(z), unshifted
    double logderiv;    // log|g_t'(z)|
    double u_current;   // driving value at current grid time
    bool swallowed;
    size_t step_index;
};

FlowState flow_point(const DrivingPath& driving, Complex z, size_t step_count,
                     double upsilon_floor = kUpsilonFloor);

// f_t(w) = g_t^{-1}(w + U_t) evaluated by composing inverse cell maps in
// reverse order; t is the grid index.
Complex inverse_point(const DrivingPath& driving, size_t t_index, Complex w);

// nonuniform-chain versions used by the adaptive tracer
Complex inverse_point_steps(std::span<const DrivingStep> steps, double a, Complex w);
// log|f'(w)| accumulated along the same backward orbit
double inverse_logderiv_steps(std::span<const DrivingStep> steps, double a, Complex w);

// --- trace and geometry --------------------------------------------------

double default_tip_offset(double a, double dt);   // 0.5*sqrt(a*dt)

TracePolyline extract_trace(const DrivingPath& driving, double tip_offset);

// exact point-to-polyline Euclidean distance
double trace_distance(const TracePolyline& trace, Complex z);
double segment_distance(Complex a, Complex b, Complex z);

double trace_diameter(const TracePolyline& trace);

// Monte-Carlo half-plane capacity of the hull R u trace via walkers from
// i*y_start stopped on the boundary; estimator y*E[Im B_tau].
struct InsufficientWalkers : std::runtime_error {
    InsufficientWalkers() : std::runtime_error("hcap oracle: stderr above 20% of estimate") {}
};

EnsembleEstimate hcap_oracle(const TracePolyline& hull, long long n_walkers,
                             double y_start, uint64_t rng_seed);

// --- serialization (formats shared with the CLI) --------------------------

void write_driving_csv(const std::string& path, const DrivingPath& d,
                       const std::vector<std::pair<std::string, std::string>>& extra_meta = {});
DrivingPath read_driving_csv(const std::string& path);

void write_trace_csv(const std::string& path, const TracePolyline& t,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta = {});
TracePolyline read_trace_csv(const std::string& path);

} // namespace sle
