#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sle/loewner.hpp"
#include "sle/rng.hpp"

namespace sle {

// --- kappa-derived constants ----------------------------------------------

struct OutOfRange : std::invalid_argument {
    explicit OutOfRange(const std::string& w) : std::invalid_argument(w) {}
};

struct KappaParams {
    double kappa = 0.0;
    double a = 0.0;           // 2/kappa
    double d = 0.0;           // 1 + kappa/8
    double beta = 0.0;        // kappa/8 + 8/kappa - 2
    double alpha_star = 0.0;  // capacity-parametrization Holder exponent
    double c_star = 0.0;      // 2 / int_0^pi sin^{4a}
};

KappaParams kappa_params(double kappa);

// --- chordal driving --------------------------------------------------------

// U_t standard Brownian motion sampled at dt; identical output for identical
// (seed, dt, horizon).
DrivingPath sample_chordal(const KappaParams& params, double horizon, double dt, uint64_t seed);

// --- two-sided radial --------------------------------------------------------

enum class TwoSidedStatus { Hit, HorizonExceeded, StepTooCoarse };

struct AngleSample {
    double s;      // log(Upsilon_0 / Upsilon_t)
    double theta;  // arg Z_t(z)
};

struct TwoSidedRun {
    DrivingPath driving;       // reconstructed driving on the uniform grid
    Complex marked;            // z
    FlowTrajectory trajectory; // SDE states at grid times (Z, logderiv, upsilon, ssin)
    std::vector<AngleSample> angles;   // sampled on the radial clock (ds = 0.02)
    double hit_time = 0.0;     // T-hat_z (may be off-grid after adaptive substeps)
    bool hit = false;
    TwoSidedStatus status = TwoSidedStatus::Hit;
    double horizon_cap = 0.0;
};

struct TwoSidedOptions {
    double hit_radius = -1.0;   // <0 means default 1e-3*Im(z)
    double horizon_cap = -1.0;  // <0 means default 50*|z|^2/a
    bool record_series = true;  // keep per-step trajectory arrays
};

TwoSidedRun sample_two_sided(const KappaParams& params, Complex z, double dt, uint64_t seed,
                             const TwoSidedOptions& opt = {});

// --- radial time-change -----------------------------------------------------

struct TooShort : std::runtime_error {
    TooShort() : std::runtime_error("radial_angle_series: run too short (s_max < 5)") {}
};

std::vector<AngleSample> radial_angle_series(const TwoSidedRun& run);

// --- dyadically refinable Brownian driving ----------------------------------

// Brownian driving on a base grid that can be refined cell by cell with
// midpoint bridges.  Each midpoint draws from a stream keyed by its dyadic
// address, so a path refined in any order, by any worker, is the same path.
class BridgedDriving {
public:
    BridgedDriving(double a, double dt0, size_t n0, uint64_t master, uint64_t path_key);

    double a() const { return a_; }
    double dt0() const { return dt0_; }
    size_t base_steps() const { return n0_; }
    double horizon() const { return dt0_ * static_cast<double>(n0_); }

    // driving value at time index*dt0/2^level (index <= n0*2^level)
    double value(int level, uint64_t index);

    // uniform DrivingPath at a refinement level (level 0 = base grid)
    DrivingPath uniform(int level);

    static constexpr int kMaxLevel = 40;

private:
    double a_, dt0_;
    size_t n0_;
    uint64_t master_, path_key_;
    std::vector<double> base_;
    std::unordered_map<uint64_t, double> cache_;
};

} // namespace sle
