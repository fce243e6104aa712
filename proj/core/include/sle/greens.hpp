#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sle/estimate.hpp"
#include "sle/loewner.hpp"
#include "sle/sampler.hpp"

namespace sle {

// --- domains ----------------------------------------------------------------

struct OutsideDomain : std::invalid_argument {
    explicit OutsideDomain(const std::string& w) : std::invalid_argument(w) {}
};

struct TableRange : std::runtime_error {
    explicit TableRange(const std::string& w) : std::runtime_error(w) {}
};

struct CoincidentPoints : std::invalid_argument {
    CoincidentPoints() : std::invalid_argument("two-point evaluation needs z != w") {}
};

// boundary mark; infinity is a tagged value, never a large float
struct BoundaryMark {
    Complex value{0.0, 0.0};
    bool at_infinity = false;

    static BoundaryMark infinity() { return {Complex(0, 0), true}; }
    static BoundaryMark at(Complex v) { return {v, false}; }
};

struct DomainSpec {
    enum class Kind { HalfPlane, Disk, SlitHalfPlane };
    Kind kind = Kind::HalfPlane;
    BoundaryMark w1 = BoundaryMark::at(Complex(0, 0));
    BoundaryMark w2 = BoundaryMark::infinity();
    double slit_base = 0.0;    // slit = [u, u+iL], |u| > 0
    double slit_length = 0.0;

    static DomainSpec half_plane() { return {}; }
    static DomainSpec half_plane_marks(BoundaryMark a, BoundaryMark b) {
        DomainSpec d;
        d.w1 = a;
        d.w2 = b;
        return d;
    }
    static DomainSpec disk(Complex m1, Complex m2) {
        DomainSpec d;
        d.kind = Kind::Disk;
        d.w1 = BoundaryMark::at(m1);
        d.w2 = BoundaryMark::at(m2);
        return d;
    }
    static DomainSpec slit_half_plane(double u, double L);

    bool contains(Complex z) const;
};

// conformal map of a DomainSpec onto (H, 0, inf), with derivative
struct DomainChart {
    Complex to_h(Complex z) const;        // domain -> H sending (w1,w2) -> (0,inf)
    double abs_deriv(Complex z) const;    // |d to_h / dz|
    Complex from_h(Complex w) const;      // inverse where defined

    DomainSpec dom;
    // internal Mobius coefficients for the H-stage (w -> (pw+q)/(rw+s))
    Complex p{1, 0}, q{0, 0}, r{0, 0}, s{1, 0};
};

DomainChart make_chart(const DomainSpec& dom);

// slit embedding F: H -> H \ [u, u+iL], hydrodynamically normalized
Complex slit_embed(Complex z, double u, double L);
Complex slit_embed_deriv(Complex z, double u, double L);

// --- closed-form Green's functions -------------------------------------------

// G(z) = Im(z)^{d-2} sin^{4a-1}(arg z) in (H, 0, inf)
double green_h(Complex z, const KappaParams& params);

double green_domain(Complex z, const DomainSpec& dom, const KappaParams& params);

// (Upsilon_D(z), S_D(z; w1, w2)) in closed form
std::pair<double, double> upsilon_s_closed(Complex z, const DomainSpec& dom);

// --- Monte-Carlo phi table ---------------------------------------------------

struct PhiGridSpec {
    int n_theta = 32;
    int n_s = 64;
    double s_min = 1e-3;
    double s_max = 1e2;
    double dt = 1e-4;   // SDE step for the node ensembles
};

// phi(z;t) = P*_z{T_z <= t} tabulated on scale-reduced coordinates
// (theta, s = t/|z|^2); exact by the scaling phi(rz; r^2 t) = phi(z; t).
struct PhiTable {
    double kappa = 0.0;
    uint64_t master_seed = 0;
    std::vector<double> theta;        // node angles, strictly inside (0,pi)
    std::vector<double> s;            // log-spaced scaled times
    std::vector<double> phi;          // row-major [i_theta * n_s + j_s]
    std::vector<double> stderr_;      // per node
    std::vector<long long> n;         // samples per node
    std::vector<double> censor_frac;  // per theta node
    std::vector<double> too_coarse_frac;

    double at(int i, int j) const { return phi[static_cast<size_t>(i) * s.size() + j]; }

    // bilinear in (theta, log s); throws TableRange outside the grid except
    // in the provably-exact vanishing region where 0 is returned
    double lookup(double theta_q, double s_q, double a) const;
    // clamped variant for quadrature use: s above the grid uses the top row,
    // theta clamps to the node range (biases are below the censoring level)
    double lookup_clamped(double theta_q, double s_q, double a) const;

    double max_censor() const;
};

PhiTable build_phi_table(const KappaParams& params, const PhiGridSpec& grid, long long n_per_node,
                         uint64_t seed, int workers = 1);

void write_phi_csv(const std::string& path, const PhiTable& t);
PhiTable read_phi_csv(const std::string& path, double expect_kappa);

// --- time-dependent Green's function -----------------------------------------

// G^t(z) = G(z) phi(z;t); exactly 0 when Im(z)^2 >= 2 a t
double green_t(Complex z, double t, const PhiTable& table, const KappaParams& params);

// M_s^t(z) = |g_s'(z)|^{2-d} G^{t-s}(Z_s(z)) along a simulated flow
double mart_weight(const FlowTrajectory& traj, size_t k, double t_total, const PhiTable& table,
                   const KappaParams& params);

// plain local martingale M_t(z) = |g'|^{2-d} G(Z); 0 after swallowing
double mart_plain(double logderiv, Complex Z, const KappaParams& params);

// --- two-point structure ------------------------------------------------------

// structural factor q^{d-2} [S(w) v q]^{-beta} G(z) G(w), |z| <= |w| by swap
double two_point_envelope(Complex z, Complex w, const KappaParams& params);

struct Green2Result {
    EnsembleEstimate estimate;   // of G-hat(z,w) = G(z) E*_z[M_{T_z}(w)]
    double censor_frac = 0.0;
    bool high_variance = false;
};

Green2Result green2_hat_mc(Complex z, Complex w, const KappaParams& params, long long n,
                           uint64_t seed, double hit_radius = -1.0, double dt = 1e-4,
                           int workers = 1);

} // namespace sle
