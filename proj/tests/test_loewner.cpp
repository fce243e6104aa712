#include "doctest.h"

#include <cmath>

#include "sle/loewner.hpp"
#include "sle/rng.hpp"
#include "sle/sampler.hpp"

using namespace sle;

TEST_CASE("slit_step closed-form examples") {
    // (2i)^2 + 1 = -3, principal root i*sqrt(3)
    Complex w = slit_step(Complex(0, 2), 0.0, 0.5);
    CHECK(w.real() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(w.imag() == doctest::Approx(std::sqrt(3.0)));

    // real points map to reals
    Complex r = slit_step(Complex(10, 0), 0.0, 0.5);
    CHECK(r.imag() == 0.0);
    CHECK(r.real() == doctest::Approx(std::sqrt(101.0)));

    // i lies on the slit of capacity 1 (tip i*sqrt(2)); swallowed
    CHECK_THROWS_AS(slit_step(Complex(0, 1), 0.0, 1.0), SwallowedThisStep);

    // on-axis point above the tip survives with Im^2 reduced by exactly 2h
    Complex s = slit_step(Complex(0, 2), 0.0, 1.0);
    CHECK(s.imag() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("slit_step_deriv examples") {
    Complex d = slit_step_deriv(Complex(0, 2), 0.0, 0.5);
    CHECK(std::abs(d - Complex(2.0 / std::sqrt(3.0), 0.0)) < 1e-14);

    // h -> 0 gives the identity derivative
    Complex d0 = slit_step_deriv(Complex(0.3, 0.7), 0.1, 1e-14);
    CHECK(std::abs(d0 - Complex(1, 0)) < 1e-10);

    Complex d10 = slit_step_deriv(Complex(10, 0), 0.0, 0.5);
    CHECK(d10.real() == doctest::Approx(10.0 / std::sqrt(101.0)).epsilon(1e-10));
}

TEST_CASE("advance_flow with zero driving follows the closed form") {
    DrivingPath d;
    d.dt = 1e-3;
    d.a = 0.75;
    d.values.assign(1001, 0.0);

    // on-axis point above the slit: g_t^2 = z^2 + 2at gives Im = sqrt(y^2 - 2at)
    // for t < y^2/(2a); not swallowed within this horizon
    const double y = 2.0;
    FlowTrajectory tr = advance_flow(d, Complex(0, y));
    REQUIRE(!tr.swallow_index.has_value());
    REQUIRE(tr.points() == 1001);
    for (size_t k = 0; k < tr.points(); k += 100) {
        const double t = d.dt * static_cast<double>(k);
        CHECK(tr.zt[k].imag() == doctest::Approx(std::sqrt(y * y - 2 * d.a * t)).epsilon(1e-12));
        CHECK(tr.ssin[k] == doctest::Approx(1.0));
    }

    // on-slit point is swallowed at t = y^2/(2a)
    const double ys = 0.8;
    FlowTrajectory sw = advance_flow(d, Complex(0, ys));
    REQUIRE(sw.swallow_index.has_value());
    const double t_swallow = d.dt * static_cast<double>(*sw.swallow_index);
    CHECK(t_swallow >= ys * ys / (2 * d.a) - 1e-12);
    CHECK(t_swallow <= ys * ys / (2 * d.a) + 2 * d.dt);
}

TEST_CASE("swallow time lower bound holds for random driving") {
    KappaParams p = kappa_params(6.0);
    RngStream rng(99, 0);
    for (int i = 0; i < 40; ++i) {
        DrivingPath d = sample_chordal(p, 2.0, 1e-3, 1000 + i);
        const Complex z(rng.uniform(-1, 1), rng.uniform(0.1, 1.0));
        FlowTrajectory tr = advance_flow(d, z);
        if (tr.swallow_index) {
            const double t_sw = d.dt * static_cast<double>(*tr.swallow_index);
            CHECK(t_sw >= z.imag() * z.imag() / (2 * p.a) - d.dt - 1e-12);
        }
        // monotonicity of Im Z and Upsilon
        for (size_t k = 1; k < tr.points(); ++k) {
            CHECK(tr.zt[k].imag() <= tr.zt[k - 1].imag() + 1e-12);
            CHECK(tr.upsilon[k] <= tr.upsilon[k - 1] + 1e-12);
        }
    }
}

TEST_CASE("inverse_point examples and round trip") {
    DrivingPath d;
    d.dt = 1e-3;
    d.a = 0.75;
    d.values.assign(1001, 0.0);

    // t=0 is the identity
    CHECK(std::abs(inverse_point(d, 0, Complex(0.3, 0.4)) - Complex(0.3, 0.4)) < 1e-15);

    // zero driving: f_t(i) = sqrt(i^2 - 2at) = i sqrt(1 + 2at)
    const double t = 1.0;
    Complex f = inverse_point(d, 1000, Complex(0, 1));
    CHECK(std::abs(f - Complex(0, std::sqrt(1 + 2 * d.a * t))) < 1e-10);

    // random-driving round trip g_t(f_t(w)) = w + U_t
    KappaParams p = kappa_params(8.0 / 3.0);
    DrivingPath rd = sample_chordal(p, 1.0, 1e-3, 7);
    RngStream rng(5, 0);
    for (int i = 0; i < 20; ++i) {
        const Complex w(rng.uniform(-2, 2), rng.uniform(0.1, 2));
        const Complex z = inverse_point(rd, rd.steps(), w);
        FlowState st = flow_point(rd, z, rd.steps(), 0.0);
        REQUIRE(!st.swallowed);
        const Complex back(st.g.real() - rd.values[rd.steps()], st.g.imag());
        CHECK(std::abs(back - w) <= 1e-8 * std::max(1.0, std::abs(w)));
    }
}

TEST_CASE("extract_trace on constant and linear driving") {
    DrivingPath d;
    d.dt = 1e-3;
    d.a = 0.75;
    d.values.assign(501, 0.0);
    TracePolyline tr = extract_trace(d, default_tip_offset(d.a, d.dt));
    tr.kappa = 8.0 / 3.0;
    // straight slit: every point close to the segment [0, i sqrt(2at)]
    CHECK(std::abs(tr.points[0]) < 2 * default_tip_offset(d.a, d.dt));
    for (size_t k = 50; k < tr.points.size(); k += 50) {
        const double t = tr.times[k];
        CHECK(std::fabs(tr.points[k].real()) < 1e-10);
        CHECK(tr.points[k].imag() ==
              doctest::Approx(std::sqrt(2 * d.a * t)).epsilon(0.05));
    }

    // linear driving: curve leaves R and stays interior for t > 0
    DrivingPath lin;
    lin.dt = 1e-3;
    lin.a = 0.5;
    lin.values.resize(501);
    for (size_t k = 0; k < lin.values.size(); ++k)
        lin.values[k] = 2.0 * lin.dt * static_cast<double>(k);
    TracePolyline lt = extract_trace(lin, default_tip_offset(lin.a, lin.dt));
    for (size_t k = 1; k < lt.points.size(); ++k) CHECK(lt.points[k].imag() > 0.0);
}

TEST_CASE("trace_distance exact against brute force") {
    TracePolyline tr;
    tr.kappa = 3;
    tr.dt = 1;
    tr.points = {Complex(0, 0), Complex(0, 1)};
    tr.times = {0, 1};
    CHECK(trace_distance(tr, Complex(0, 1)) == 0.0);
    CHECK(trace_distance(tr, Complex(1, 0)) == doctest::Approx(1.0));
    CHECK(trace_distance(tr, Complex(1, 2)) == doctest::Approx(std::sqrt(2.0)));

    // random polyline vs dense point sampling
    RngStream rng(3, 1);
    TracePolyline poly;
    poly.kappa = 3;
    poly.dt = 1;
    Complex p(0, 0.5);
    for (int i = 0; i < 30; ++i) {
        poly.points.push_back(p);
        poly.times.push_back(i);
        p += Complex(rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.2));
        p = Complex(p.real(), std::max(0.01, p.imag()));
    }
    for (int trial = 0; trial < 20; ++trial) {
        const Complex z(rng.uniform(-1, 1), rng.uniform(0, 1.5));
        double brute = 1e300;
        for (size_t s = 1; s < poly.points.size(); ++s)
            for (int j = 0; j <= 100; ++j) {
                const Complex q = poly.points[s - 1] +
                                  (poly.points[s] - poly.points[s - 1]) * (j / 100.0);
                brute = std::min(brute, std::abs(z - q));
            }
        const double exact = trace_distance(poly, z);
        CHECK(exact <= brute + 1e-12);
        CHECK(exact >= brute - 0.01);   // sampling gap
    }
}

TEST_CASE("hydrodynamic normalization at large |z|") {
    KappaParams p = kappa_params(8.0 / 3.0);
    DrivingPath d = sample_chordal(p, 1.0, 1e-3, 11);
    const double at = p.a * 1.0;
    const double mu = std::max(std::sqrt(at), d.max_abs());
    for (double R : {50.0 * mu, 100.0 * mu, 400.0 * mu}) {
        const Complex z(R / std::sqrt(2.0), R / std::sqrt(2.0));
        FlowState st = flow_point(d, z, d.steps(), 0.0);
        const Complex err = st.g - z - at / z;
        CHECK(std::abs(err) <= 10.0 * at * mu / std::norm(z));
    }
}

TEST_CASE("derivative flow consistency with finite differences") {
    KappaParams p = kappa_params(4.0);
    DrivingPath d = sample_chordal(p, 0.5, 1e-3, 13);
    for (const Complex z : {Complex(0.4, 0.9), Complex(-1.2, 1.5), Complex(0.1, 2.2)}) {
        FlowState st = flow_point(d, z, d.steps(), 0.0);
        REQUIRE(!st.swallowed);
        const double zeta = 1e-5 * z.imag();
        FlowState sp = flow_point(d, z + zeta, d.steps(), 0.0);
        FlowState sm = flow_point(d, z - zeta, d.steps(), 0.0);
        const double fd = std::abs(sp.g - sm.g) / (2 * zeta);
        CHECK(std::exp(st.logderiv) == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("step-size convergence order") {
    KappaParams p = kappa_params(8.0 / 3.0);
    // one Brownian path sampled at three nested resolutions
    BridgedDriving drv(p.a, 1.0 / 256, 256, 777, 0);
    const Complex z(0.3, 0.8);
    Complex g[3];
    for (int lev = 0; lev < 3; ++lev) {
        DrivingPath d = drv.uniform(lev);
        FlowState st = flow_point(d, z, d.steps(), 0.0);
        g[lev] = Complex(st.g.real() - d.values[d.steps()], st.g.imag());
    }
    const double e0 = std::abs(g[1] - g[0]);
    const double e1 = std::abs(g[2] - g[1]);
    CHECK(e1 * 1.5 <= e0 + 1e-12);
}

TEST_CASE("hcap_oracle on analytic hulls") {
    // empty hull
    TracePolyline empty;
    empty.kappa = 2;
    empty.dt = 1;
    EnsembleEstimate e0 = hcap_oracle(empty, 2000, 10.0, 5);
    CHECK(std::fabs(e0.mean) < 0.02);

    // vertical slit [0, iL]: hcap = L^2/2 in the g = z + hcap/z normalization
    const double L = 1.0;
    TracePolyline slit;
    slit.kappa = 2;
    slit.dt = 1;
    for (int i = 0; i <= 64; ++i) {
        slit.points.emplace_back(0.0, L * i / 64.0);
        slit.times.push_back(i);
    }
    EnsembleEstimate e = hcap_oracle(slit, 20000, 10.0 * L, 6);
    CHECK(std::fabs(e.mean - L * L / 2) <= 3.0 * e.stderr_ + 0.01);
}

TEST_CASE("driving and trace CSV round trip") {
    KappaParams p = kappa_params(3.0);
    DrivingPath d = sample_chordal(p, 0.1, 1e-3, 3);
    write_driving_csv("test_driving.csv", d);
    DrivingPath back = read_driving_csv("test_driving.csv");
    REQUIRE(back.values.size() == d.values.size());
    CHECK(back.dt == d.dt);
    CHECK(back.a == d.a);
    for (size_t i = 0; i < d.values.size(); ++i) CHECK(back.values[i] == d.values[i]);

    TracePolyline tr = extract_trace(d, default_tip_offset(d.a, d.dt));
    tr.kappa = 3.0;
    write_trace_csv("test_trace.csv", tr);
    TracePolyline tback = read_trace_csv("test_trace.csv");
    REQUIRE(tback.points.size() == tr.points.size());
    for (size_t i = 0; i < tr.points.size(); ++i)
        CHECK(std::abs(tback.points[i] - tr.points[i]) == 0.0);
    std::remove("test_driving.csv");
    std::remove("test_trace.csv");
}
