#include "sle/sampler.hpp"

#include <cmath>

#include "sle/quadrature.hpp"

namespace sle {

KappaParams kappa_params(double kappa) {
    if (!(kappa > 0.0) || !(kappa < 8.0))
        throw OutOfRange("kappa_params: kappa must lie in (0,8)");
    KappaParams p;
    p.kappa = kappa;
    p.a = 2.0 / kappa;
    p.d = 1.0 + kappa / 8.0;
    p.beta = kappa / 8.0 + 8.0 / kappa - 2.0;
    p.alpha_star = 1.0 - kappa / (24.0 + 2.0 * kappa - 8.0 * std::sqrt(8.0 + kappa));
    p.c_star = 2.0 / sin_power_integral(4.0 * p.a);
    return p;
}

DrivingPath sample_chordal(const KappaParams& params, double horizon, double dt, uint64_t seed) {
    if (!(horizon > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("sample_chordal: horizon and dt must be positive");
    const auto n = static_cast<size_t>(std::ceil(horizon / dt - 1e-9));
    DrivingPath d;
    d.dt = dt;
    d.a = params.a;
    d.values.resize(n + 1);
    d.values[0] = 0.0;
    RngStream rng(seed, 0x5c0fULL);
    const double sd = std::sqrt(dt);
    for (size_t k = 1; k <= n; ++k) d.values[k] = d.values[k - 1] + sd * rng.normal();
    return d;
}

namespace {

struct TwoSidedState {
    double x, y;        // Z = x + iy
    double logd;        // log|g'(z)|
    double ups;         // conformal radius (times 1/2)
    double t;           // elapsed capacity time
};

// one Euler-Maruyama substep with frozen coefficients; Y and Upsilon use
// exact exponential updates so Y^2 >= y0^2 - 2at holds step-wise
inline void em_substep(TwoSidedState& s, double a, double delta, double db, double& du_accum) {
    const double z2 = s.x * s.x + s.y * s.y;
    const double drift = (1.0 - 3.0 * a) * s.x / z2;
    du_accum += (4.0 * a - 1.0) * s.x / z2 * delta - db;
    s.logd += -a * (s.x * s.x - s.y * s.y) / (z2 * z2) * delta;
    s.ups *= std::exp(-2.0 * a * s.y * s.y / (z2 * z2) * delta);
    s.y *= std::exp(-a * delta / z2);
    s.x += drift * delta + db;
    s.t += delta;
}

} // namespace

TwoSidedRun sample_two_sided(const KappaParams& params, Complex z, double dt, uint64_t seed,
                             const TwoSidedOptions& opt) {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("sample_two_sided: need Im(z) > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("sample_two_sided: need dt > 0");
    const double a = params.a;
    const double hit_radius = opt.hit_radius > 0.0 ? opt.hit_radius : 1e-3 * z.imag();
    const double cap = opt.horizon_cap > 0.0 ? opt.horizon_cap : 50.0 * std::norm(z) / a;

    TwoSidedRun run;
    run.marked = z;
    run.horizon_cap = cap;
    run.driving.dt = dt;
    run.driving.a = a;
    run.driving.values.push_back(0.0);
    run.trajectory.z0 = z;
    run.trajectory.dt = dt;

    RngStream rng(seed, 0x25ad1a1ULL);
    TwoSidedState st{z.real(), z.imag(), 0.0, z.imag(), 0.0};

    auto record = [&](const TwoSidedState& s) {
        if (!opt.record_series) return;
        run.trajectory.zt.emplace_back(s.x, s.y);
        run.trajectory.logderiv.push_back(s.logd);
        run.trajectory.upsilon.push_back(s.ups);
        run.trajectory.ssin.push_back(s.y / std::hypot(s.x, s.y));
    };
    record(st);

    // angle series on the radial clock; substeps can cross many e-folds of
    // Upsilon inside one grid cell near the hit
    const double ups0 = z.imag();
    double next_s = 0.0;
    auto record_angle = [&](const TwoSidedState& s) {
        if (!opt.record_series) return;
        const double rs = std::log(ups0 / s.ups);
        if (rs >= next_s) {
            run.angles.push_back({rs, std::atan2(s.y, s.x)});
            next_s = rs + 0.02;
        }
    };
    record_angle(st);

    bool hit = false, too_coarse = false;
    double u_grid = 0.0;
    // substeps keep |Z| >= 10 sqrt(a delta); the SDE is singular at Z = 0, so
    // the step contracts with |Z|^2 all the way down to the numerical floor
    const double delta_floor = 1e-14 * dt;

    while (!hit && !too_coarse && st.t < cap - 0.5 * dt) {
        double du = 0.0;
        double remaining = dt;
        long long guard = 0;
        while (remaining > 1e-12 * dt && !hit && !too_coarse) {
            const double z2 = st.x * st.x + st.y * st.y;
            double delta = std::min(remaining, std::min(dt, z2 / (100.0 * a)));
            if (delta < delta_floor || ++guard > 2000000) {
                if (st.ups <= hit_radius)
                    hit = true;
                else
                    too_coarse = true;
                break;
            }
            const double db = std::sqrt(delta) * rng.normal();
            em_substep(st, a, delta, db, du);
            remaining -= delta;
            record_angle(st);
            if (st.ups <= hit_radius) hit = true;
        }
        if (hit || too_coarse) {
            run.hit_time = st.t;
            break;
        }
        u_grid += du;
        run.driving.values.push_back(u_grid);
        record(st);
    }

    run.hit = hit;
    if (hit) {
        run.status = TwoSidedStatus::Hit;
        run.hit_time = st.t;
    } else if (too_coarse) {
        run.status = TwoSidedStatus::StepTooCoarse;
        run.hit_time = st.t;
    } else {
        run.status = TwoSidedStatus::HorizonExceeded;
        run.hit_time = st.t;
    }
    return run;
}

std::vector<AngleSample> radial_angle_series(const TwoSidedRun& run) {
    if (!run.hit) throw TooShort();
    std::vector<AngleSample> out;
    out.reserve(run.angles.size());
    double last_s = -1.0;
    for (const auto& smp : run.angles) {
        if (smp.s <= last_s) continue;
        out.push_back(smp);
        last_s = smp.s;
    }
    if (out.empty() || out.back().s < 5.0) throw TooShort();
    return out;
}

BridgedDriving::BridgedDriving(double a, double dt0, size_t n0, uint64_t master, uint64_t path_key)
    : a_(a), dt0_(dt0), n0_(n0), master_(master), path_key_(path_key) {
    base_.resize(n0 + 1);
    base_[0] = 0.0;
    RngStream rng(master, mix_seed(path_key, 0xba5eULL));
    const double sd = std::sqrt(dt0);
    for (size_t k = 1; k <= n0; ++k) base_[k] = base_[k - 1] + sd * rng.normal();
}

double BridgedDriving::value(int level, uint64_t index) {
    if (level == 0) return base_[index];
    if ((index & 1ULL) == 0) return value(level - 1, index >> 1);
    const uint64_t key = (static_cast<uint64_t>(level) << 44) | index;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double left = value(level - 1, index >> 1);
    const double right = value(level - 1, (index >> 1) + 1);
    const double parent_dt = dt0_ / static_cast<double>(1ULL << (level - 1));
    RngStream rng(master_, mix_seed(path_key_, key));
    const double mid = 0.5 * (left + right) + 0.5 * std::sqrt(parent_dt) * rng.normal();
    cache_.emplace(key, mid);
    return mid;
}

DrivingPath BridgedDriving::uniform(int level) {
    DrivingPath d;
    d.a = a_;
    d.dt = dt0_ / static_cast<double>(1ULL << level);
    const uint64_t n = n0_ * (1ULL << level);
    d.values.resize(n + 1);
    for (uint64_t k = 0; k <= n; ++k) d.values[k] = value(level, k);
    return d;
}

} // namespace sle
