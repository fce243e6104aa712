#include "sle/loewner.hpp"

#include <algorithm>
#include <cmath>

#include "sle/csvio.hpp"
#include "sle/rng.hpp"

namespace sle {

namespace {

// sqrt with the branch fixed so the result has Im >= 0
inline Complex sqrt_upper(Complex zeta) {
    Complex r = std::sqrt(zeta);
    if (r.imag() < 0.0) r = -r;
    return r;
}

} // namespace

bool slit_step_try(Complex z, double u, double h, Complex& out) {
    const Complex dz(z.real() - u, z.imag());
    const Complex zeta = dz * dz + 2.0 * h;
    // exact discriminant test: an interior point is swallowed this step iff
    // it sits on the growing slit, i.e. Re(z)=u and Im(z)^2 <= 2h, which is
    // exactly when zeta lands on the nonnegative real axis
    if (z.imag() > 0.0 && zeta.imag() == 0.0 && zeta.real() >= 0.0) {
        return false;
    }
    Complex r = sqrt_upper(zeta);
    out = Complex(u + r.real(), r.imag());
    return true;
}

Complex slit_step(Complex z, double u, double h) {
    Complex out;
    if (!slit_step_try(z, u, h, out)) throw SwallowedThisStep();
    return out;
}

Complex slit_step_deriv(Complex z, double u, double h) {
    const Complex dz(z.real() - u, z.imag());
    const Complex zeta = dz * dz + 2.0 * h;
    if (z.imag() > 0.0 && zeta.imag() == 0.0 && zeta.real() >= 0.0) throw SwallowedThisStep();
    return dz / sqrt_upper(zeta);
}

Complex slit_step_inverse(Complex w, double u, double h) {
    const Complex dw(w.real() - u, w.imag());
    Complex r = sqrt_upper(dw * dw - 2.0 * h);
    return Complex(u + r.real(), r.imag());
}

Complex slit_step_inverse_deriv(Complex w, double u, double h) {
    const Complex dw(w.real() - u, w.imag());
    return dw / sqrt_upper(dw * dw - 2.0 * h);
}

FlowTrajectory advance_flow(const DrivingPath& driving, Complex z, double upsilon_floor) {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("advance_flow: need Im(z) > 0");
    const size_t n = driving.steps();
    const double h = driving.a * driving.dt;

    FlowTrajectory traj;
    traj.z0 = z;
    traj.dt = driving.dt;
    traj.zt.reserve(n + 1);
    traj.logderiv.reserve(n + 1);
    traj.upsilon.reserve(n + 1);
    traj.ssin.reserve(n + 1);

    Complex g = z;          // g_t(z), unshifted
    double logd = 0.0;
    for (size_t k = 0;; ++k) {
        const Complex Z(g.real() - driving.values[k], g.imag());
        const double ups = Z.imag() * std::exp(-logd);
        traj.zt.push_back(Z);
        traj.logderiv.push_back(logd);
        traj.upsilon.push_back(ups);
        traj.ssin.push_back(Z.imag() / std::abs(Z));
        if (ups < upsilon_floor) {
            traj.swallow_index = k;
            traj.swallowed_by_floor = true;
            // state at the floor is kept; nothing beyond it
            traj.zt.pop_back();
            traj.logderiv.pop_back();
            traj.upsilon.pop_back();
            traj.ssin.pop_back();
            break;
        }
        if (k == n) break;
        Complex g_next;
        if (!slit_step_try(g, driving.values[k], h, g_next)) {
            traj.swallow_index = k + 1;
            break;
        }
        logd += std::log(std::abs(slit_step_deriv(g, driving.values[k], h)));
        g = g_next;
    }
    return traj;
}

FlowState flow_point(const DrivingPath& driving, Complex z, size_t step_count,
                     double upsilon_floor) {
    const double h = driving.a * driving.dt;
    FlowState st{z, 0.0, driving.values[0], false, 0};
    for (size_t k = 0; k < step_count; ++k) {
        Complex g_next;
        if (!slit_step_try(st.g, driving.values[k], h, g_next)) {
            st.swallowed = true;
            st.step_index = k;
            return st;
        }
        st.logderiv += std::log(std::abs(slit_step_deriv(st.g, driving.values[k], h)));
        st.g = g_next;
        st.step_index = k + 1;
        st.u_current = driving.values[k + 1];
        const double ups = (st.g.imag() - 0.0) * std::exp(-st.logderiv);
        if (ups < upsilon_floor) {
            st.swallowed = true;
            return st;
        }
    }
    return st;
}

Complex inverse_point(const DrivingPath& driving, size_t t_index, Complex w) {
    if (!(w.imag() > 0.0)) throw std::invalid_argument("inverse_point: need Im(w) > 0");
    const double h = driving.a * driving.dt;
    Complex p = w + driving.values[t_index];
    for (size_t j = t_index; j-- > 0;) {
        p = slit_step_inverse(p, driving.values[j], h);
        if (!(p.imag() > 0.0))
            throw LossOfPrecision("inverse_point: imaginary part collapsed at step " +
                                  std::to_string(j));
    }
    return p;
}

Complex inverse_point_steps(std::span<const DrivingStep> steps, double a, Complex w) {
    Complex p = w;
    for (size_t j = steps.size(); j-- > 0;) {
        p = slit_step_inverse(p, steps[j].u, a * steps[j].dt);
        if (!(p.imag() >= 0.0))
            throw LossOfPrecision("inverse_point_steps: imaginary part collapsed");
    }
    return p;
}

double inverse_logderiv_steps(std::span<const DrivingStep> steps, double a, Complex w) {
    Complex p = w;
    double logd = 0.0;
    for (size_t j = steps.size(); j-- > 0;) {
        logd += std::log(std::abs(slit_step_inverse_deriv(p, steps[j].u, a * steps[j].dt)));
        p = slit_step_inverse(p, steps[j].u, a * steps[j].dt);
        if (!(p.imag() >= 0.0))
            throw LossOfPrecision("inverse_logderiv_steps: imaginary part collapsed");
    }
    return logd;
}

double default_tip_offset(double a, double dt) { return 0.5 * std::sqrt(a * dt); }

TracePolyline extract_trace(const DrivingPath& driving, double tip_offset) {
    if (!(tip_offset > 0.0)) throw std::invalid_argument("extract_trace: need tip_offset > 0");
    TracePolyline t;
    t.dt = driving.dt;
    t.kappa = 2.0 / driving.a;
    const size_t n = driving.steps();
    t.points.reserve(n + 1);
    t.times.reserve(n + 1);
    for (size_t k = 0; k <= n; ++k) {
        t.points.push_back(inverse_point(driving, k, Complex(0.0, tip_offset)));
        t.times.push_back(driving.dt * static_cast<double>(k));
    }
    return t;
}

double segment_distance(Complex a, Complex b, Complex z) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(z - a);
    double s = ((z.real() - a.real()) * ab.real() + (z.imag() - a.imag()) * ab.imag()) / len2;
    s = std::clamp(s, 0.0, 1.0);
    return std::abs(z - (a + s * ab));
}

double trace_distance(const TracePolyline& trace, Complex z) {
    if (trace.points.empty()) throw std::invalid_argument("trace_distance: empty trace");
    double best = std::abs(z - trace.points[0]);
    for (size_t i = 1; i < trace.points.size(); ++i)
        best = std::min(best, segment_distance(trace.points[i - 1], trace.points[i], z));
    return best;
}

double trace_diameter(const TracePolyline& trace) {
    // diameter of the point set; O(n^2) over a decimated subset for long traces
    const auto& pts = trace.points;
    if (pts.size() < 2) return 0.0;
    size_t stride = std::max<size_t>(1, pts.size() / 2048);
    double d = 0.0;
    for (size_t i = 0; i < pts.size(); i += stride)
        for (size_t j = i + stride; j < pts.size(); j += stride)
            d = std::max(d, std::abs(pts[i] - pts[j]));
    // against bounding box too, which is exact for axis extremes
    double xmin = 1e300, xmax = -1e300, ymax = 0.0;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymax = std::max(ymax, p.imag());
    }
    return std::max({d, xmax - xmin, ymax});
}

EnsembleEstimate hcap_oracle(const TracePolyline& hull, long long n_walkers,
                             double y_start, uint64_t rng_seed) {
    const double diam = trace_diameter(hull);
    if (!hull.points.empty() && y_start < 10.0 * diam)
        throw std::invalid_argument("hcap_oracle: need y_start >= 10*diam(hull)");
    if (n_walkers < 2) throw std::invalid_argument("hcap_oracle: need n_walkers >= 2");

    const double scale = std::max(1.0, std::max(diam, y_start));
    const double tol = 1e-7 * scale;

    auto boundary_dist = [&](Complex p) {
        double d = p.imag();
        if (!hull.points.empty()) {
            double hd = std::abs(p - hull.points[0]);
            for (size_t i = 1; i < hull.points.size(); ++i)
                hd = std::min(hd, segment_distance(hull.points[i - 1], hull.points[i], p));
            d = std::min(d, hd);
        }
        return d;
    };

    double sum = 0.0, sumsq = 0.0;
    for (long long w = 0; w < n_walkers; ++w) {
        RngStream rng(rng_seed, static_cast<uint64_t>(w));
        Complex p(0.0, y_start);
        // walk on spheres: jump to a uniform point of the largest boundary-free disk
        double d = boundary_dist(p);
        int guard = 0;
        while (d > tol && guard++ < 100000) {
            double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            p += d * Complex(std::cos(angle), std::sin(angle));
            d = boundary_dist(p);
        }
        const double im = std::max(0.0, p.imag());
        sum += im;
        sumsq += im * im;
    }
    const double nn = static_cast<double>(n_walkers);
    const double mean_im = sum / nn;
    const double var_im = std::max(0.0, (sumsq - nn * mean_im * mean_im) / (nn - 1.0));
    EnsembleEstimate e;
    e.mean = y_start * mean_im;
    e.stderr_ = y_start * std::sqrt(var_im / nn);
    e.n = n_walkers;
    e.seed = rng_seed;
    if (e.mean > 100.0 * tol * y_start && e.stderr_ > 0.2 * e.mean) throw InsufficientWalkers();
    return e;
}

void write_driving_csv(const std::string& path, const DrivingPath& d,
                       const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    CsvWriter w(path);
    w.raw_line("# a=" + fmt_double(d.a) + " dt=" + fmt_double(d.dt));
    for (const auto& [k, v] : extra_meta) w.meta(k, v);
    w.header("k,t,u");
    for (size_t k = 0; k < d.values.size(); ++k) {
        w.row({std::to_string(k), fmt_double(d.dt * static_cast<double>(k)),
               fmt_double(d.values[k])});
    }
}

DrivingPath read_driving_csv(const std::string& path) {
    CsvFile f = read_csv(path);
    DrivingPath d;
    d.a = f.meta_num("a");
    d.dt = f.meta_num("dt");
    d.values.reserve(f.rows.size());
    for (const auto& r : f.rows) d.values.push_back(std::strtod(r.at(2).c_str(), nullptr));
    if (d.values.empty() || d.values[0] != 0.0)
        throw std::runtime_error("driving csv: U_0 must be 0");
    return d;
}

void write_trace_csv(const std::string& path, const TracePolyline& t,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    CsvWriter w(path);
    w.raw_line("# kappa=" + fmt_double(t.kappa) + " dt=" + fmt_double(t.dt));
    for (const auto& [k, v] : extra_meta) w.meta(k, v);
    w.header("k,t,re,im");
    for (size_t k = 0; k < t.points.size(); ++k) {
        w.row({std::to_string(k), fmt_double(t.times[k]), fmt_double(t.points[k].real()),
               fmt_double(t.points[k].imag())});
    }
}

TracePolyline read_trace_csv(const std::string& path) {
    CsvFile f = read_csv(path);
    TracePolyline t;
    t.kappa = f.meta_num("kappa");
    t.dt = f.meta_num("dt");
    for (const auto& r : f.rows) {
        t.times.push_back(std::strtod(r.at(1).c_str(), nullptr));
        t.points.emplace_back(std::strtod(r.at(2).c_str(), nullptr),
                              std::strtod(r.at(3).c_str(), nullptr));
    }
    return t;
}

} // namespace sle
