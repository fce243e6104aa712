#include "sle/natparam.hpp"

#include <algorithm>
#include <cmath>

#include "sle/csvio.hpp"

namespace sle {

namespace {

constexpr double kPi = 3.14159265358979323846;

double boundary_dist(Complex z, const DomainSpec& dom) {
    switch (dom.kind) {
        case DomainSpec::Kind::HalfPlane:
            return z.imag();
        case DomainSpec::Kind::Disk:
            return 1.0 - std::abs(z);
        case DomainSpec::Kind::SlitHalfPlane:
            return std::min(z.imag(),
                            segment_distance(Complex(dom.slit_base, 0.0),
                                             Complex(dom.slit_base, dom.slit_length), z));
    }
    return 0.0;
}

size_t index_at_time(const std::vector<double>& times, double t) {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return times.size() - 1;
    if (it != times.begin() && t - *(it - 1) < *it - t) --it;
    return static_cast<size_t>(it - times.begin());
}

} // namespace

double minkowski_content(const TracePolyline& trace, double upto, double eps,
                         const DomainSpec& dom, double f_floor) {
    if (!(eps > 0.0)) throw std::invalid_argument("minkowski_content: need eps > 0");
    if (!(trace.kappa > 0.0) || !(trace.kappa < 8.0))
        throw std::invalid_argument("minkowski_content: trace must carry kappa in (0,8)");
    const double d = 1.0 + trace.kappa / 8.0;
    const double floor_dist = f_floor >= 0.0 ? f_floor : std::sqrt(eps);

    // prefix up to capacity time `upto`
    size_t K = 0;
    while (K + 1 < trace.points.size() && trace.times[K + 1] <= upto + 1e-15) ++K;
    if (trace.points.empty() || upto <= 0.0) return 0.0;

    double max_sp = 0.0;
    for (size_t i = 1; i <= K; ++i)
        max_sp = std::max(max_sp, std::abs(trace.points[i] - trace.points[i - 1]));
    if (max_sp > eps / 4.0 + 1e-15)
        throw UnderResolved("minkowski_content: trace spacing " + fmt_double(max_sp) +
                            " exceeds eps/4 = " + fmt_double(eps / 4.0));

    // raster bounds
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (size_t i = 0; i <= K; ++i) {
        xmin = std::min(xmin, trace.points[i].real());
        xmax = std::max(xmax, trace.points[i].real());
        ymin = std::min(ymin, trace.points[i].imag());
        ymax = std::max(ymax, trace.points[i].imag());
    }
    const double cell = eps / 4.0;
    const double pad = eps + cell;
    xmin -= pad;
    ymin -= pad;
    xmax += pad;
    ymax += pad;
    const auto nx = static_cast<size_t>(std::ceil((xmax - xmin) / cell));
    const auto ny = static_cast<size_t>(std::ceil((ymax - ymin) / cell));
    std::vector<float> dist(nx * ny, 1e30f);

    auto relax_segment = [&](Complex a, Complex b) {
        const double lo_x = std::min(a.real(), b.real()) - pad;
        const double hi_x = std::max(a.real(), b.real()) + pad;
        const double lo_y = std::min(a.imag(), b.imag()) - pad;
        const double hi_y = std::max(a.imag(), b.imag()) + pad;
        const auto ix0 = static_cast<size_t>(std::max(0.0, std::floor((lo_x - xmin) / cell)));
        const auto iy0 = static_cast<size_t>(std::max(0.0, std::floor((lo_y - ymin) / cell)));
        const auto ix1 = std::min(nx - 1, static_cast<size_t>(std::max(0.0, std::ceil((hi_x - xmin) / cell))));
        const auto iy1 = std::min(ny - 1, static_cast<size_t>(std::max(0.0, std::ceil((hi_y - ymin) / cell))));
        for (size_t iy = iy0; iy <= iy1; ++iy) {
            const double cy = ymin + (static_cast<double>(iy) + 0.5) * cell;
            for (size_t ix = ix0; ix <= ix1; ++ix) {
                const double cx = xmin + (static_cast<double>(ix) + 0.5) * cell;
                const auto dseg = static_cast<float>(segment_distance(a, b, Complex(cx, cy)));
                float& ref = dist[iy * nx + ix];
                if (dseg < ref) ref = dseg;
            }
        }
    };
    if (K == 0) relax_segment(trace.points[0], trace.points[0]);
    for (size_t i = 1; i <= K; ++i) relax_segment(trace.points[i - 1], trace.points[i]);

    size_t count = 0;
    for (size_t iy = 0; iy < ny; ++iy) {
        const double cy = ymin + (static_cast<double>(iy) + 0.5) * cell;
        for (size_t ix = 0; ix < nx; ++ix) {
            if (dist[iy * nx + ix] > eps) continue;
            const double cx = xmin + (static_cast<double>(ix) + 0.5) * cell;
            if (boundary_dist(Complex(cx, cy), dom) < floor_dist) continue;
            ++count;
        }
    }
    return std::pow(eps, d - 2.0) * static_cast<double>(count) * cell * cell;
}

ContentProfile content_profile(const TracePolyline& trace, double upto,
                               std::span<const double> epsilons, const DomainSpec& dom) {
    ContentProfile p;
    p.domain = dom;
    for (double e : epsilons) {
        p.epsilons.push_back(e);
        p.contents.push_back(minkowski_content(trace, upto, e, dom));
    }
    return p;
}

void write_content_csv(const std::string& path, const ContentProfile& p,
                       const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    CsvWriter w(path);
    w.meta("f_rule", p.f_rule);
    for (const auto& [k, v] : extra_meta) w.meta(k, v);
    w.header("eps,content");
    for (size_t i = 0; i < p.epsilons.size(); ++i)
        w.row({fmt_double(p.epsilons[i]), fmt_double(p.contents[i])});
}

double l_quadrature(const DrivingPath& driving, size_t s_index, double delta,
                    const PhiTable& table, int n_level, const KappaParams& params,
                    const LQuadOptions& opt) {
    if (delta <= 0.0) return 0.0;
    if (s_index > driving.steps()) throw std::invalid_argument("l_quadrature: bad s_index");
    const double a = params.a;
    const double d = params.d;
    const double delta_n = static_cast<double>(n_level) * std::pow(2.0, -0.5 * n_level);
    const double rho_min = 0.01 * std::sqrt(delta);
    if (rho_min >= delta_n)
        throw std::invalid_argument("l_quadrature: localization radius below inner cutoff");

    std::vector<DrivingStep> steps(s_index);
    for (size_t k = 0; k < s_index; ++k) steps[k] = {driving.dt, driving.values[k]};
    // inverse maps expect coordinates relative to U_s (f_s(w) = g_s^{-1}(w+U_s));
    // inverse_point_steps composes the chain as laid out, so shift by U_s once
    const double u_s = driving.values[s_index];

    const double y_cut = std::sqrt(2.0 * a * delta);   // G^delta vanishes above
    double prev = -1.0;
    for (int lev = 0; lev <= opt.max_refine; ++lev) {
        const int nr = opt.base_radii << lev;
        const int na_half = std::max(2, (opt.base_angles << lev) / 2);
        const double dlr = std::log(delta_n / rho_min) / nr;
        double sum = 0.0;
        for (int ir = 0; ir < nr; ++ir) {
            const double rho = rho_min * std::exp((ir + 0.5) * dlr);
            const double s_scaled = delta / (rho * rho);
            // G^delta is alive only where rho*sin(theta) < y_cut; put the
            // angular nodes inside that band at both ends of (0,pi)
            const double th_b = rho <= y_cut ? 0.5 * kPi : std::asin(y_cut / rho);
            const double dth = th_b / na_half;
            for (int band = 0; band < 2; ++band) {
                for (int ia = 0; ia < na_half; ++ia) {
                    const double th_lo = (ia + 0.5) * dth;
                    const double th = band == 0 ? th_lo : kPi - th_lo;
                    const double sin_th = std::sin(th);
                    const double y = rho * sin_th;
                    if (y >= y_cut) continue;
                    const double phi = table.lookup_clamped(th, s_scaled, a);
                    if (phi <= 0.0) continue;
                    const double g = std::pow(y, d - 2.0) * std::pow(sin_th, 4.0 * a - 1.0);
                    double fpow = 1.0;
                    if (s_index > 0) {
                        const Complex w(rho * std::cos(th) + u_s, y);
                        const double logfp = inverse_logderiv_steps(steps, a, w);
                        fpow = std::exp(d * logfp);
                    }
                    sum += fpow * g * phi * rho * rho * dlr * dth;
                }
            }
        }
        if (prev >= 0.0 && std::fabs(sum - prev) <= opt.rel_tol * std::max(std::fabs(sum), 1e-300))
            return sum;
        if (lev == opt.max_refine) {
            if (prev >= 0.0 &&
                std::fabs(sum - prev) <= 3.0 * opt.rel_tol * std::max(std::fabs(sum), 1e-300))
                return sum;   // tolerate slow settling within 3x before giving up
            throw QuadratureDiverged("l_quadrature: no stabilization to " +
                                     fmt_double(opt.rel_tol) + " after " +
                                     std::to_string(opt.max_refine) + " refinements");
        }
        prev = sum;
    }
    return prev;
}

ThetaSeries theta_dyadic(const DrivingPath& driving, double t, int n_level,
                         const PhiTable& table, const KappaParams& params,
                         const LQuadOptions& opt) {
    if (t > driving.horizon() + 1e-12)
        throw std::invalid_argument("theta_dyadic: t beyond driving horizon");
    const double cell = std::pow(2.0, -n_level);
    const double spc_f = cell / driving.dt;
    const auto spc = static_cast<size_t>(std::llround(spc_f));
    if (spc == 0 || std::fabs(spc_f - static_cast<double>(spc)) > 1e-9)
        throw std::invalid_argument("theta_dyadic: driving dt must divide 2^-n");
    ThetaSeries out;
    out.n_level = n_level;
    double cum = 0.0;
    for (size_t j = 0; (static_cast<double>(j) + 1.0) * cell <= t + 1e-12; ++j) {
        const double inc = l_quadrature(driving, j * spc, cell, table, n_level, params, opt);
        cum += inc;
        out.times.push_back((static_cast<double>(j) + 1.0) * cell);
        out.increments.push_back(inc);
        out.cumulative.push_back(cum);
    }
    return out;
}

void write_theta_csv(const std::string& path, const ThetaSeries& s,
                     const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    CsvWriter w(path);
    w.meta("n_level", static_cast<long long>(s.n_level));
    for (const auto& [k, v] : extra_meta) w.meta(k, v);
    w.header("t,increment,cumulative");
    for (size_t i = 0; i < s.times.size(); ++i)
        w.row({fmt_double(s.times[i]), fmt_double(s.increments[i]),
               fmt_double(s.cumulative[i])});
}

double transport_theta(const TracePolyline& trace, std::span<const double> times,
                       std::span<const double> increments,
                       const std::function<Complex(Complex)>& map_deriv, double d) {
    if (times.size() != increments.size() + 1)
        throw std::invalid_argument("transport_theta: times must have one more entry");
    double total = 0.0;
    for (size_t j = 0; j < increments.size(); ++j) {
        const size_t idx = index_at_time(trace.times, times[j]);
        const Complex fp = map_deriv(trace.points[idx]);
        const double m = std::abs(fp);
        if (!(m > 1e-9) || !(m < 1e9))
            throw MapSingularOnTrace("transport_theta: |F'| out of range at trace point " +
                                     std::to_string(idx));
        total += std::pow(m, d) * increments[j];
    }
    return total;
}

double holder_statistic(const TracePolyline& trace, double alpha, double t1, double t2) {
    if (!(t1 > 0.0) || !(t2 > t1)) throw std::invalid_argument("holder_statistic: bad window");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("holder_statistic: alpha in (0,1)");
    if (t2 > trace.times.back() + 1e-12)
        throw std::invalid_argument("holder_statistic: window beyond trace horizon");
    double min_gap = 1e300;
    for (size_t i = 1; i < trace.times.size(); ++i)
        min_gap = std::min(min_gap, trace.times[i] - trace.times[i - 1]);
    double sup = 0.0;
    for (double delta = t2 - t1; delta >= 2.0 * min_gap; delta *= 0.5) {
        for (double s = t1; s + delta <= t2 + 1e-12; s += delta) {
            const size_t i = index_at_time(trace.times, s);
            const size_t j = index_at_time(trace.times, s + delta);
            if (i == j) continue;
            const double gap = trace.times[j] - trace.times[i];
            if (gap <= 0.0) continue;
            sup = std::max(sup, std::abs(trace.points[j] - trace.points[i]) /
                                    std::pow(gap, alpha));
        }
    }
    return sup;
}

double integral_green_t(double t, const PhiTable& table, const KappaParams& params,
                        int n_radii, int n_angles) {
    if (!(t > 0.0)) return 0.0;
    const double a = params.a;
    const double d = params.d;
    const double s_max = table.s.back();
    const double rho_min = std::sqrt(t / s_max);
    const double rho_max = 20.0 * std::sqrt(t * (1.0 + a));
    const double y_cut = std::sqrt(2.0 * a * t);

    double prev = -1.0;
    for (int lev = 0; lev < 4; ++lev) {
        const int nr = n_radii << lev;
        const int na_half = std::max(2, (n_angles << lev) / 2);
        const double dlr = std::log(rho_max / rho_min) / nr;
        double sum = 0.0;
        // inner disk rho < rho_min: s beyond the table top; phi there is the
        // saturated top-row value (within the censoring fraction of 1)
        {
            const double dth = kPi / (2 * na_half);
            for (int ia = 0; ia < 2 * na_half; ++ia) {
                const double th = (ia + 0.5) * dth;
                const double phi = table.lookup_clamped(th, s_max, a);
                sum += std::pow(std::sin(th), 4.0 * a + d - 3.0) * phi * dth *
                       std::pow(rho_min, d) / d;
            }
        }
        for (int ir = 0; ir < nr; ++ir) {
            const double rho = rho_min * std::exp((ir + 0.5) * dlr);
            const double s_scaled = t / (rho * rho);
            const double th_b = rho <= y_cut ? 0.5 * kPi : std::asin(y_cut / rho);
            const double dth = th_b / na_half;
            for (int band = 0; band < 2; ++band) {
                for (int ia = 0; ia < na_half; ++ia) {
                    const double th_lo = (ia + 0.5) * dth;
                    const double th = band == 0 ? th_lo : kPi - th_lo;
                    const double sin_th = std::sin(th);
                    if (rho * sin_th >= y_cut) continue;
                    const double phi = table.lookup_clamped(th, s_scaled, a);
                    if (phi <= 0.0) continue;
                    sum += std::pow(rho, d) * std::pow(sin_th, 4.0 * a + d - 3.0) * phi * dlr *
                           dth;
                }
            }
        }
        if (prev >= 0.0 && std::fabs(sum - prev) <= 0.005 * sum) return sum;
        prev = sum;
    }
    return prev;
}

} // namespace sle
