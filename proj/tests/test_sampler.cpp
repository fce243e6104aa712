#include "doctest.h"

#include <cmath>

#include "sle/loewner.hpp"
#include "sle/quadrature.hpp"
#include "sle/sampler.hpp"

using namespace sle;

TEST_CASE("kappa_params derived constants") {
    // kappa = 8/3: a = 3/4, d = 4/3, beta = 4/3, c* = 2/(4/3) = 3/2
    KappaParams p = kappa_params(8.0 / 3.0);
    CHECK(p.a == doctest::Approx(0.75));
    CHECK(p.d == doctest::Approx(4.0 / 3.0));
    CHECK(p.beta == doctest::Approx(4.0 / 3.0));
    CHECK(p.c_star == doctest::Approx(1.5).epsilon(1e-8));

    // kappa = 4: int sin^2 = pi/2, c* = 4/pi
    KappaParams p4 = kappa_params(4.0);
    CHECK(p4.a == doctest::Approx(0.5));
    CHECK(p4.d == doctest::Approx(1.5));
    CHECK(p4.beta == doctest::Approx(0.5));
    CHECK(p4.c_star == doctest::Approx(4.0 / 3.14159265358979).epsilon(1e-8));

    // kappa = 2: d = 5/4, alpha* ~ 0.26
    KappaParams p2 = kappa_params(2.0);
    CHECK(p2.d == doctest::Approx(1.25));
    CHECK(p2.alpha_star == doctest::Approx(0.26).epsilon(0.02));

    CHECK_THROWS_AS(kappa_params(0.0), OutOfRange);
    CHECK_THROWS_AS(kappa_params(8.0), OutOfRange);
    CHECK_THROWS_AS(kappa_params(-1.0), OutOfRange);
}

TEST_CASE("sin power integral quadrature agrees with the gamma closed form") {
    for (double pexp : {1.0, 1.5, 2.0, 3.0, 4.7, 8.0}) {
        CHECK(sin_power_integral(pexp) ==
              doctest::Approx(sin_power_integral_gamma(pexp)).epsilon(1e-9));
    }
    // int_0^pi sin^3 = 4/3 exactly
    CHECK(sin_power_integral(3.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("sample_chordal determinism and Brownian statistics") {
    KappaParams p = kappa_params(8.0 / 3.0);
    DrivingPath a = sample_chordal(p, 1.0, 1e-3, 42);
    DrivingPath b = sample_chordal(p, 1.0, 1e-3, 42);
    REQUIRE(a.values.size() == b.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    CHECK(a.values[0] == 0.0);

    // ensemble variance of U_1 within the 3-sigma chi-square band
    const int n = 10000;
    double s2 = 0.0;
    int tail = 0;
    for (int r = 0; r < n; ++r) {
        DrivingPath d = sample_chordal(p, 1.0, 1e-2, 1000000 + r);
        const double u1 = d.values.back();
        s2 += u1 * u1;
        if (d.max_abs() > 3.0) ++tail;
    }
    s2 /= n;
    CHECK(s2 > 0.94);
    CHECK(s2 < 1.06);
    // reflection-principle tail: P{max |U| > 3} is about 2*2*P{N>3} ~ 0.54%
    CHECK(static_cast<double>(tail) / n <= 0.01);
}

TEST_CASE("chordal scaling in distribution") {
    // paths at horizon r^2 with values scaled by r match the base law
    KappaParams p = kappa_params(4.0);
    const double r = 2.0;
    const int n = 4000;
    double m1 = 0, v1 = 0, m2 = 0, v2 = 0, mx1 = 0, mx2 = 0;
    for (int i = 0; i < n; ++i) {
        DrivingPath base = sample_chordal(p, 1.0, 1e-2, 500 + i);
        DrivingPath scaled = sample_chordal(p, r * r, r * r * 1e-2, 900000 + i);
        const double ub = base.values.back();
        const double us = scaled.values.back() / r;
        m1 += ub;
        v1 += ub * ub;
        m2 += us;
        v2 += us * us;
        mx1 += base.max_abs();
        mx2 += scaled.max_abs() / r;
    }
    m1 /= n; v1 = v1 / n - m1 * m1;
    m2 /= n; v2 = v2 / n - m2 * m2;
    CHECK(std::fabs(m1 - m2) < 0.06);
    CHECK(v1 / v2 == doctest::Approx(1.0).epsilon(0.08));
    CHECK((mx1 / n) / (mx2 / n) == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("two-sided radial run invariants") {
    KappaParams p = kappa_params(8.0 / 3.0);
    const double dt = 2e-4;
    int hits = 0;
    for (int r = 0; r < 30; ++r) {
        const Complex z(0.2, 0.9);
        TwoSidedRun run = sample_two_sided(p, z, dt, 777 + r);
        if (run.status != TwoSidedStatus::Hit) continue;
        ++hits;
        CHECK(run.hit_time >= z.imag() * z.imag() / (2 * p.a) - dt - 1e-12);
        // deterministic Y bound holds exactly step-wise
        for (size_t k = 0; k < run.trajectory.points(); ++k) {
            const double y2 = run.trajectory.zt[k].imag() * run.trajectory.zt[k].imag();
            CHECK(y2 >= z.imag() * z.imag() - 2 * p.a * dt * static_cast<double>(k) - 1e-10);
        }
    }
    CHECK(hits >= 28);   // hit with probability one; cap is generous
}

TEST_CASE("two-sided drift symmetry at z = iy") {
    KappaParams p = kappa_params(4.0);
    const double y = 1.0, dt = 2e-4;
    const double t_probe = y * y / (4 * p.a);
    const auto k_probe = static_cast<size_t>(t_probe / dt);
    double sum = 0, sumsq = 0;
    int n = 0;
    for (int r = 0; r < 400; ++r) {
        TwoSidedRun run = sample_two_sided(p, Complex(0, y), dt, 31000 + r);
        if (run.trajectory.points() > k_probe) {
            const double x = run.trajectory.zt[k_probe].real();
            sum += x;
            sumsq += x * x;
            ++n;
        }
    }
    REQUIRE(n > 300);
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::fabs(mean) <= 3.0 * se + 1e-6);
}

TEST_CASE("two-sided driving reconstruction reproduces the SDE states") {
    KappaParams p = kappa_params(8.0 / 3.0);
    const double dt = 1e-3;
    for (int r = 0; r < 10; ++r) {
        const Complex z(0.3, 1.0);
        TwoSidedRun run = sample_two_sided(p, z, dt, 5150 + r);
        if (run.status != TwoSidedStatus::Hit) continue;
        FlowTrajectory replay = advance_flow(run.driving, z);
        const size_t K = std::min(replay.points(), run.trajectory.points());
        REQUIRE(K > 10);
        double worst = 0.0;
        for (size_t k = 0; k < K; ++k)
            worst = std::max(worst, std::abs(replay.zt[k] - run.trajectory.zt[k]));
        CHECK(worst <= 5.0 * std::sqrt(dt));
    }
}

TEST_CASE("radial_angle_series time change") {
    KappaParams p = kappa_params(8.0 / 3.0);
    TwoSidedRun run;
    int attempts = 0;
    do {
        run = sample_two_sided(p, Complex(0, 1), 2e-4, 999 + attempts);
    } while (run.status != TwoSidedStatus::Hit && ++attempts < 10);
    REQUIRE(run.status == TwoSidedStatus::Hit);
    auto series = radial_angle_series(run);
    REQUIRE(!series.empty());
    CHECK(series.front().s == doctest::Approx(0.0));
    CHECK(series.front().theta == doctest::Approx(1.5707963267948966));
    CHECK(series.back().s >= 5.0);
    for (size_t i = 1; i < series.size(); ++i) {
        CHECK(series[i].s > series[i - 1].s);
        CHECK(series[i].theta > 0.0);
        CHECK(series[i].theta < 3.14159265358979323846);
    }
}

TEST_CASE("bridged driving is consistent across levels and query order") {
    BridgedDriving a(0.75, 1.0 / 64, 64, 2024, 7);
    BridgedDriving b(0.75, 1.0 / 64, 64, 2024, 7);
    // query b in a scrambled order, then compare level-2 grids
    for (int i = 40; i >= 0; i -= 3) (void)b.value(2, static_cast<uint64_t>(i * 5 % 257));
    DrivingPath ua = a.uniform(2);
    DrivingPath ub = b.uniform(2);
    REQUIRE(ua.values.size() == ub.values.size());
    for (size_t i = 0; i < ua.values.size(); ++i) CHECK(ua.values[i] == ub.values[i]);
    // coarse values embed in fine grids
    DrivingPath u0 = a.uniform(0);
    for (size_t k = 0; k < u0.values.size(); ++k) CHECK(u0.values[k] == ua.values[4 * k]);

    // bridge midpoints have the right conditional variance scale
    double s2 = 0.0;
    int n = 0;
    for (uint64_t k = 0; k + 1 < 128; k += 2) {
        BridgedDriving c(1.0, 1.0, 128, 11, k);
        const double mid = c.value(1, 2 * 10 + 1);
        const double cond = 0.5 * (c.value(0, 10) + c.value(0, 11));
        s2 += (mid - cond) * (mid - cond);
        ++n;
    }
    CHECK(s2 / n == doctest::Approx(0.25).epsilon(0.5));   // var = dt/4 with dt = 1
}
