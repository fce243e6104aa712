#include "sle/greens.hpp"

#include <algorithm>
#include <cmath>

#include "sle/csvio.hpp"
#include "sle/parallel.hpp"

namespace sle {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline Complex sqrt_upper(Complex zeta) {
    Complex r = std::sqrt(zeta);
    if (r.imag() < 0.0) r = -r;
    return r;
}

} // namespace

DomainSpec DomainSpec::slit_half_plane(double u, double L) {
    if (u == 0.0) throw std::invalid_argument("slit base must satisfy |u| > 0");
    if (!(L > 0.0)) throw std::invalid_argument("slit length must be positive");
    DomainSpec d;
    d.kind = Kind::SlitHalfPlane;
    d.slit_base = u;
    d.slit_length = L;
    d.w1 = BoundaryMark::at(Complex(u - std::sqrt(u * u + L * L), 0.0));
    d.w2 = BoundaryMark::infinity();
    return d;
}

bool DomainSpec::contains(Complex z) const {
    switch (kind) {
        case Kind::HalfPlane:
            return z.imag() > 0.0;
        case Kind::Disk:
            return std::abs(z) < 1.0;
        case Kind::SlitHalfPlane: {
            if (!(z.imag() > 0.0)) return false;
            const double d = segment_distance(Complex(slit_base, 0.0),
                                              Complex(slit_base, slit_length), z);
            return d > 0.0;
        }
    }
    return false;
}

Complex slit_embed(Complex z, double u, double L) {
    const Complex dz(z.real() - u, z.imag());
    return Complex(u, 0.0) + sqrt_upper(dz * dz + L * L);
}

Complex slit_embed_deriv(Complex z, double u, double L) {
    const Complex dz(z.real() - u, z.imag());
    return dz / sqrt_upper(dz * dz + L * L);
}

namespace {

// inverse of slit_embed: H \ slit -> H
inline Complex slit_collapse(Complex z, double u, double L) {
    const Complex dz(z.real() - u, z.imag());
    return Complex(u, 0.0) + sqrt_upper(dz * dz - L * L);
}

inline Complex slit_collapse_deriv(Complex z, double u, double L) {
    const Complex dz(z.real() - u, z.imag());
    return dz / sqrt_upper(dz * dz - L * L);
}

// Cayley map D -> H with S(0) = i, S(1) = 0, S(-1) = inf
inline Complex cayley(Complex zeta) { return Complex(0, 1) * (1.0 - zeta) / (1.0 + zeta); }
inline Complex cayley_deriv(Complex zeta) {
    const Complex d = 1.0 + zeta;
    return Complex(0, -2) / (d * d);
}

} // namespace

DomainChart make_chart(const DomainSpec& dom) {
    DomainChart c;
    c.dom = dom;

    // The H-stage Mobius (pw+q)/(rw+s) moves the marks, already mapped into
    // Hbar, to (0, inf) while preserving H.
    auto set_h_mobius = [&c](BoundaryMark m1, BoundaryMark m2) {
        if (m2.at_infinity) {
            // w -> w - x1
            c.p = Complex(1, 0);
            c.q = -m1.value;
            c.r = Complex(0, 0);
            c.s = Complex(1, 0);
        } else if (m1.at_infinity) {
            // w -> 1/(x2 - w) maps inf -> 0 and x2 -> inf, preserves H
            c.p = Complex(0, 0);
            c.q = Complex(1, 0);
            c.r = Complex(-1, 0);
            c.s = m2.value;
        } else {
            // w -> (w - x1)/(x2 - w) up to sign fix
            c.p = Complex(1, 0);
            c.q = -m1.value;
            c.r = Complex(-1, 0);
            c.s = m2.value;
            // orientation: probe an interior point
            const Complex probe(0.5 * (m1.value.real() + m2.value.real()), 1.0);
            const Complex img = (c.p * probe + c.q) / (c.r * probe + c.s);
            if (img.imag() < 0.0) {
                c.p = -c.p;
                c.q = -c.q;
            }
        }
    };

    switch (dom.kind) {
        case DomainSpec::Kind::HalfPlane:
            set_h_mobius(dom.w1, dom.w2);
            break;
        case DomainSpec::Kind::Disk: {
            BoundaryMark m1, m2;
            if (std::abs(dom.w1.value + 1.0) < 1e-14)
                m1 = BoundaryMark::infinity();
            else
                m1 = BoundaryMark::at(cayley(dom.w1.value));
            if (std::abs(dom.w2.value + 1.0) < 1e-14)
                m2 = BoundaryMark::infinity();
            else
                m2 = BoundaryMark::at(cayley(dom.w2.value));
            set_h_mobius(m1, m2);
            break;
        }
        case DomainSpec::Kind::SlitHalfPlane:
            // slit_collapse already sends the canonical marks to (0, inf)
            c.p = Complex(1, 0);
            c.q = Complex(0, 0);
            c.r = Complex(0, 0);
            c.s = Complex(1, 0);
            break;
    }
    return c;
}

Complex DomainChart::to_h(Complex z) const {
    Complex w = z;
    if (dom.kind == DomainSpec::Kind::Disk)
        w = cayley(z);
    else if (dom.kind == DomainSpec::Kind::SlitHalfPlane)
        w = slit_collapse(z, dom.slit_base, dom.slit_length);
    return (p * w + q) / (r * w + s);
}

double DomainChart::abs_deriv(Complex z) const {
    Complex w = z;
    double pre = 1.0;
    if (dom.kind == DomainSpec::Kind::Disk) {
        pre = std::abs(cayley_deriv(z));
        w = cayley(z);
    } else if (dom.kind == DomainSpec::Kind::SlitHalfPlane) {
        pre = std::abs(slit_collapse_deriv(z, dom.slit_base, dom.slit_length));
        w = slit_collapse(z, dom.slit_base, dom.slit_length);
    }
    const Complex den = r * w + s;
    const double mob = std::abs(p * s - q * r) / std::norm(den);
    return pre * mob;
}

Complex DomainChart::from_h(Complex w) const {
    // invert the Mobius stage, then the geometry stage
    const Complex z_h = (s * w - q) / (-r * w + p);
    switch (dom.kind) {
        case DomainSpec::Kind::HalfPlane:
            return z_h;
        case DomainSpec::Kind::Disk: {
            // inverse Cayley: zeta = (i - w)/(i + w)
            return (Complex(0, 1) - z_h) / (Complex(0, 1) + z_h);
        }
        case DomainSpec::Kind::SlitHalfPlane:
            return slit_embed(z_h, dom.slit_base, dom.slit_length);
    }
    return z_h;
}

double green_h(Complex z, const KappaParams& params) {
    if (!(z.imag() > 0.0)) throw OutsideDomain("green_h: need Im(z) > 0");
    const double theta = std::atan2(z.imag(), z.real());
    return std::pow(z.imag(), params.d - 2.0) * std::pow(std::sin(theta), 4.0 * params.a - 1.0);
}

double green_domain(Complex z, const DomainSpec& dom, const KappaParams& params) {
    if (!dom.contains(z)) throw OutsideDomain("green_domain: z outside domain");
    const DomainChart chart = make_chart(dom);
    const Complex w = chart.to_h(z);
    const double fp = chart.abs_deriv(z);
    return std::pow(fp, 2.0 - params.d) * green_h(w, params);
}

std::pair<double, double> upsilon_s_closed(Complex z, const DomainSpec& dom) {
    if (!dom.contains(z)) throw OutsideDomain("upsilon_s_closed: z outside domain");
    const DomainChart chart = make_chart(dom);
    const Complex w = chart.to_h(z);
    const double s = std::sin(std::atan2(w.imag(), w.real()));
    double ups = 0.0;
    switch (dom.kind) {
        case DomainSpec::Kind::HalfPlane:
            ups = z.imag();
            break;
        case DomainSpec::Kind::Disk:
            ups = 0.5 * (1.0 - std::norm(z));
            break;
        case DomainSpec::Kind::SlitHalfPlane: {
            const Complex in_h = slit_collapse(z, dom.slit_base, dom.slit_length);
            ups = in_h.imag() / std::abs(slit_collapse_deriv(z, dom.slit_base, dom.slit_length));
            break;
        }
    }
    return {ups, s};
}

// --- phi table ---------------------------------------------------------------

double PhiTable::lookup(double theta_q, double s_q, double a) const {
    const double sin_t = std::sin(theta_q);
    if (s_q <= sin_t * sin_t / (2.0 * a)) return 0.0;   // exact vanishing region
    if (theta_q < theta.front() || theta_q > theta.back())
        throw TableRange("phi lookup: theta outside grid");
    if (s_q < s.front() || s_q > s.back()) throw TableRange("phi lookup: s outside grid");
    return lookup_clamped(theta_q, s_q, a);
}

double PhiTable::lookup_clamped(double theta_q, double s_q, double a) const {
    const double sin_t = std::sin(theta_q);
    if (s_q <= sin_t * sin_t / (2.0 * a)) return 0.0;
    const double tq = std::clamp(theta_q, theta.front(), theta.back());
    const double sq = std::clamp(s_q, s.front(), s.back());
    // theta grid is uniform
    const double dtheta = theta[1] - theta[0];
    int i = static_cast<int>((tq - theta.front()) / dtheta);
    i = std::clamp(i, 0, static_cast<int>(theta.size()) - 2);
    const double wt = std::clamp((tq - theta[i]) / dtheta, 0.0, 1.0);
    // s grid is log-spaced
    const double dls = std::log(s[1] / s[0]);
    int j = static_cast<int>(std::log(sq / s.front()) / dls);
    j = std::clamp(j, 0, static_cast<int>(s.size()) - 2);
    const double ws = std::clamp(std::log(sq / s[j]) / dls, 0.0, 1.0);
    const double v00 = at(i, j), v01 = at(i, j + 1), v10 = at(i + 1, j), v11 = at(i + 1, j + 1);
    return (1 - wt) * ((1 - ws) * v00 + ws * v01) + wt * ((1 - ws) * v10 + ws * v11);
}

double PhiTable::max_censor() const {
    double m = 0.0;
    for (double c : censor_frac) m = std::max(m, c);
    return m;
}

PhiTable build_phi_table(const KappaParams& params, const PhiGridSpec& grid, long long n_per_node,
                         uint64_t seed, int workers) {
    if (n_per_node < 100) throw std::invalid_argument("build_phi_table: need n_per_node >= 100");
    PhiTable t;
    t.kappa = params.kappa;
    t.master_seed = seed;
    t.theta.resize(grid.n_theta);
    for (int i = 0; i < grid.n_theta; ++i)
        t.theta[i] = (i + 0.5) * kPi / static_cast<double>(grid.n_theta);
    t.s.resize(grid.n_s);
    for (int j = 0; j < grid.n_s; ++j)
        t.s[j] = grid.s_min *
                 std::pow(grid.s_max / grid.s_min, static_cast<double>(j) / (grid.n_s - 1));
    const size_t cells = static_cast<size_t>(grid.n_theta) * grid.n_s;
    t.phi.assign(cells, 0.0);
    t.stderr_.assign(cells, 0.0);
    t.n.assign(cells, n_per_node);
    t.censor_frac.assign(grid.n_theta, 0.0);
    t.too_coarse_frac.assign(grid.n_theta, 0.0);

    // ensure the empirical CDF is honest across the whole s grid
    const double cap = std::max(50.0 / params.a, 1.05 * grid.s_max);

    parallel_for(static_cast<size_t>(grid.n_theta), workers, [&](size_t i) {
        const Complex z(std::cos(t.theta[i]), std::sin(t.theta[i]));
        std::vector<double> hit_times;
        hit_times.reserve(static_cast<size_t>(n_per_node));
        long long censored = 0, coarse = 0;
        TwoSidedOptions opt;
        opt.horizon_cap = cap;
        opt.record_series = false;
        for (long long r = 0; r < n_per_node; ++r) {
            const uint64_t rep_seed = mix_seed(seed, (static_cast<uint64_t>(i) << 32) |
                                                         static_cast<uint64_t>(r));
            TwoSidedRun run = sample_two_sided(params, z, grid.dt, rep_seed, opt);
            if (run.status == TwoSidedStatus::Hit) {
                hit_times.push_back(run.hit_time);
            } else if (run.status == TwoSidedStatus::StepTooCoarse) {
                ++coarse;
            } else {
                ++censored;
            }
        }
        std::sort(hit_times.begin(), hit_times.end());
        const double nn = static_cast<double>(n_per_node);
        for (int j = 0; j < grid.n_s; ++j) {
            const auto hits = static_cast<double>(
                std::upper_bound(hit_times.begin(), hit_times.end(), t.s[j]) - hit_times.begin());
            const double p = hits / nn;
            t.phi[i * grid.n_s + j] = p;
            t.stderr_[i * grid.n_s + j] = std::sqrt(p * (1.0 - p) / nn);
        }
        t.censor_frac[i] = static_cast<double>(censored) / nn;
        t.too_coarse_frac[i] = static_cast<double>(coarse) / nn;
    });
    return t;
}

void write_phi_csv(const std::string& path, const PhiTable& t) {
    CsvWriter w(path);
    w.raw_line("# kappa=" + fmt_double(t.kappa) + " seed=" + std::to_string(t.master_seed) +
               " grid=" + std::to_string(t.theta.size()) + "x" + std::to_string(t.s.size()));
    std::string cens = "# censor=";
    for (size_t i = 0; i < t.censor_frac.size(); ++i) {
        if (i) cens += ";";
        cens += fmt_double(t.censor_frac[i]);
    }
    w.raw_line(cens);
    std::string coarse = "# too_coarse=";
    for (size_t i = 0; i < t.too_coarse_frac.size(); ++i) {
        if (i) coarse += ";";
        coarse += fmt_double(t.too_coarse_frac[i]);
    }
    w.raw_line(coarse);
    w.header("theta,s,phi,stderr,n");
    for (size_t i = 0; i < t.theta.size(); ++i)
        for (size_t j = 0; j < t.s.size(); ++j)
            w.row({fmt_double(t.theta[i]), fmt_double(t.s[j]), fmt_double(t.at(i, j)),
                   fmt_double(t.stderr_[i * t.s.size() + j]),
                   std::to_string(t.n[i * t.s.size() + j])});
}

PhiTable read_phi_csv(const std::string& path, double expect_kappa) {
    CsvFile f = read_csv(path);
    PhiTable t;
    t.kappa = f.meta_num("kappa");
    if (std::fabs(t.kappa - expect_kappa) > 1e-9 * std::max(1.0, expect_kappa))
        throw std::runtime_error("phi table kappa mismatch: file has " + fmt_double(t.kappa) +
                                 ", requested " + fmt_double(expect_kappa));
    t.master_seed = static_cast<uint64_t>(f.meta_num("seed"));
    auto parse_list = [&](const std::string& key, std::vector<double>& out) {
        auto it = f.meta.find(key);
        if (it == f.meta.end()) return;
        std::string cur;
        for (char c : it->second + ";") {
            if (c == ';') {
                if (!cur.empty()) out.push_back(std::strtod(cur.c_str(), nullptr));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
    };
    parse_list("censor", t.censor_frac);
    parse_list("too_coarse", t.too_coarse_frac);
    std::vector<double> thetas, ss;
    for (const auto& r : f.rows) {
        const double th = std::strtod(r.at(0).c_str(), nullptr);
        const double sv = std::strtod(r.at(1).c_str(), nullptr);
        if (thetas.empty() || th != thetas.back()) thetas.push_back(th);
        if (thetas.size() == 1) ss.push_back(sv);
    }
    t.theta = thetas;
    t.s = ss;
    t.phi.resize(thetas.size() * ss.size());
    t.stderr_.resize(t.phi.size());
    t.n.resize(t.phi.size());
    size_t idx = 0;
    for (const auto& r : f.rows) {
        t.phi[idx] = std::strtod(r.at(2).c_str(), nullptr);
        t.stderr_[idx] = std::strtod(r.at(3).c_str(), nullptr);
        t.n[idx] = std::strtoll(r.at(4).c_str(), nullptr, 10);
        ++idx;
    }
    return t;
}

double green_t(Complex z, double t, const PhiTable& table, const KappaParams& params) {
    if (!(z.imag() > 0.0)) throw OutsideDomain("green_t: need Im(z) > 0");
    if (t < 0.0) throw std::invalid_argument("green_t: need t >= 0");
    if (z.imag() * z.imag() >= 2.0 * params.a * t) return 0.0;   // exact vanishing
    const double theta = std::atan2(z.imag(), z.real());
    const double s = t / std::norm(z);
    return green_h(z, params) * table.lookup(theta, s, params.a);
}

double mart_weight(const FlowTrajectory& traj, size_t k, double t_total, const PhiTable& table,
                   const KappaParams& params) {
    if (k >= traj.points()) throw std::invalid_argument("mart_weight: index beyond trajectory");
    const double t_k = traj.dt * static_cast<double>(k);
    if (t_total < t_k) throw std::invalid_argument("mart_weight: need t_total >= t_k");
    if (t_total <= t_k) return 0.0;
    const double gpow = std::exp((2.0 - params.d) * traj.logderiv[k]);
    return gpow * green_t(traj.zt[k], t_total - t_k, table, params);
}

double mart_plain(double logderiv, Complex Z, const KappaParams& params) {
    return std::exp((2.0 - params.d) * logderiv) * green_h(Z, params);
}

double two_point_envelope(Complex z, Complex w, const KappaParams& params) {
    if (z == w) throw CoincidentPoints();
    if (std::abs(z) > std::abs(w)) std::swap(z, w);
    const double q = std::abs(w - z) / std::abs(w);
    const double sw = std::sin(std::atan2(w.imag(), w.real()));
    return std::pow(q, params.d - 2.0) * std::pow(std::max(sw, q), -params.beta) *
           green_h(z, params) * green_h(w, params);
}

Green2Result green2_hat_mc(Complex z, Complex w, const KappaParams& params, long long n,
                           uint64_t seed, double hit_radius, double dt, int workers) {
    if (z == w) throw CoincidentPoints();
    std::vector<double> samples(static_cast<size_t>(n), 0.0);
    std::vector<char> ok(static_cast<size_t>(n), 0);
    TwoSidedOptions opt;
    opt.hit_radius = hit_radius;
    opt.record_series = false;

    parallel_for(static_cast<size_t>(n), workers, [&](size_t r) {
        const uint64_t rep_seed = mix_seed(seed, r);
        TwoSidedRun run = sample_two_sided(params, z, dt, rep_seed, opt);
        if (run.status != TwoSidedStatus::Hit) return;
        ok[r] = 1;
        // M_{T_z}(w) under the same driving; 0 if w was swallowed first
        FlowState st = flow_point(run.driving, w, run.driving.steps());
        if (st.swallowed) {
            samples[r] = 0.0;
            return;
        }
        const Complex Zw(st.g.real() - st.u_current, st.g.imag());
        samples[r] = mart_plain(st.logderiv, Zw, params);
    });

    std::vector<double> kept;
    kept.reserve(samples.size());
    for (size_t r = 0; r < samples.size(); ++r)
        if (ok[r]) kept.push_back(samples[r]);
    Green2Result res;
    res.censor_frac = 1.0 - static_cast<double>(kept.size()) / static_cast<double>(n);
    if (kept.size() < 2) throw std::runtime_error("green2_hat_mc: too few uncensored runs");
    EnsembleEstimate e = estimate_from_samples(kept, seed);
    const double gz = green_h(z, params);
    res.estimate = {gz * e.mean, gz * e.stderr_, e.n, seed};
    res.high_variance = res.estimate.stderr_ > 0.3 * std::fabs(res.estimate.mean);
    return res;
}

} // namespace sle
