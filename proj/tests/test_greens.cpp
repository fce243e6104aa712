#include "doctest.h"

#include <cmath>

#include "sle/greens.hpp"
#include "sle/rng.hpp"
#include "test_support.hpp"

using namespace sle;

static constexpr double kPi = 3.14159265358979323846;

TEST_CASE("green_h closed-form examples") {
    KappaParams p83 = kappa_params(8.0 / 3.0);
    CHECK(green_h(Complex(0, 1), p83) == doctest::Approx(1.0));
    CHECK(green_h(Complex(0, 2), p83) == doctest::Approx(std::pow(2.0, -2.0 / 3.0)));

    // z = e^{i pi/4}, kappa = 4: Im^{-1/2} * sin(pi/4)^1
    KappaParams p4 = kappa_params(4.0);
    const double s = std::sqrt(2.0) / 2.0;
    CHECK(green_h(std::polar(1.0, kPi / 4), p4) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));

    CHECK_THROWS_AS(green_h(Complex(1, 0), p4), OutsideDomain);
}

TEST_CASE("green_domain covariance") {
    KappaParams p = kappa_params(8.0 / 3.0);
    // identity on (H, 0, inf)
    const Complex z(0.3, 0.7);
    CHECK(green_domain(z, DomainSpec::half_plane(), p) == doctest::Approx(green_h(z, p)));

    // disk with marks (1, e^{2 theta i}) at the origin.  The conformal
    // covariance rule gives Upsilon_D(0)^{d-2} sin^{4a-1} theta with
    // Upsilon_D(0) = 1/2, i.e. an extra 2^{2-d} on top of sin^{4a-1} theta.
    for (double theta : {0.3, 0.8, kPi / 2}) {
        DomainSpec disk = DomainSpec::disk(Complex(1, 0), std::polar(1.0, 2 * theta));
        CHECK(green_domain(Complex(0, 0), disk, p) ==
              doctest::Approx(std::pow(2.0, 2.0 - p.d) *
                              std::pow(std::sin(theta), 4 * p.a - 1)).epsilon(1e-10));
    }

    // scaling as a Mobius special case: half-plane marks (0, inf) under z -> rz
    for (double r : {0.25, 4.0}) {
        CHECK(green_h(r * z, p) == doctest::Approx(std::pow(r, p.d - 2) * green_h(z, p)));
    }

    CHECK_THROWS_AS(green_domain(Complex(2, 0.1), DomainSpec::disk(Complex(1, 0), Complex(-1, 0)), p),
                    OutsideDomain);
}

TEST_CASE("general half-plane marks reduce correctly") {
    KappaParams p = kappa_params(4.0);
    // marks (x1, inf) translate
    DomainSpec d1 = DomainSpec::half_plane_marks(BoundaryMark::at(Complex(2, 0)),
                                                 BoundaryMark::infinity());
    const Complex z(2.5, 1.1);
    CHECK(green_domain(z, d1, p) == doctest::Approx(green_h(z - Complex(2, 0), p)));
}

TEST_CASE("upsilon_s_closed examples and Koebe sandwich") {
    DomainSpec disk = DomainSpec::disk(Complex(1, 0), Complex(-1, 0));
    auto [u0, s0] = upsilon_s_closed(Complex(0, 0), disk);
    CHECK(u0 == doctest::Approx(0.5));

    auto [uh, sh] = upsilon_s_closed(Complex(0.3, 0.9), DomainSpec::half_plane());
    CHECK(uh == doctest::Approx(0.9));
    CHECK(sh == doctest::Approx(0.9 / std::abs(Complex(0.3, 0.9))));

    auto [u9, s9] = upsilon_s_closed(Complex(0.9, 0), disk);
    CHECK(u9 == doctest::Approx(0.095));
    const double dist = 0.1;
    CHECK(u9 / 2 <= dist);
    CHECK(dist <= 2 * u9);

    // slit domain: points far from the slit behave like the half-plane
    DomainSpec slit = DomainSpec::slit_half_plane(2.0, 0.5);
    auto [us, ss] = upsilon_s_closed(Complex(-30.0, 1.0), slit);
    CHECK(us == doctest::Approx(1.0).epsilon(0.01));
    CHECK(ss == doctest::Approx(std::sin(std::atan2(1.0, -30.0))).epsilon(0.01));
}

TEST_CASE("slit embedding is a hydrodynamically normalized bijection") {
    const double u = 1.5, L = 0.7;
    RngStream rng(4, 4);
    for (int i = 0; i < 200; ++i) {
        const Complex z(rng.uniform(-4, 4), rng.uniform(1e-3, 4));
        const Complex w = slit_embed(z, u, L);
        CHECK(w.imag() > 0.0);
        // avoids the slit
        CHECK(segment_distance(Complex(u, 0), Complex(u, L), w) > -1e-15);
        // inverse round trip through the collapse map inside make_chart
        DomainChart chart = make_chart(DomainSpec::slit_half_plane(u, L));
        CHECK(std::abs(chart.to_h(w) - z) < 1e-9 * std::max(1.0, std::abs(z)));
    }
    // large-|z| normalization F(z) = z + L^2/(2z) + ...
    const Complex big(120.0, 80.0);
    CHECK(std::abs(slit_embed(big, u, L) - big - 0.5 * L * L / (big - u)) < 1e-3);
    // the domain mark w1 = u - sqrt(u^2 + L^2) collapses to the origin
    DomainChart chart = make_chart(DomainSpec::slit_half_plane(u, L));
    const Complex near_mark(u - std::sqrt(u * u + L * L), 1e-7);
    CHECK(std::abs(chart.to_h(near_mark)) < 1e-3);
}

TEST_CASE("phi table invariants") {
    const PhiTable& t = test_phi_table();
    KappaParams p = kappa_params(8.0 / 3.0);
    REQUIRE(t.theta.size() == 16);
    REQUIRE(t.s.size() == 48);
    for (size_t i = 0; i < t.theta.size(); ++i) {
        const double vanish = std::pow(std::sin(t.theta[i]), 2) / (2 * p.a);
        double prev = -1.0;
        for (size_t j = 0; j < t.s.size(); ++j) {
            const double v = t.at(i, j);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v >= prev);   // nondecreasing in s
            prev = v;
            if (t.s[j] < vanish) CHECK(v == 0.0);   // exact vanishing region
        }
        // phi approaches 1 at the top of the grid
        CHECK(t.at(i, t.s.size() - 1) >= 0.95);
    }
    CHECK(t.max_censor() < 0.02);
}

TEST_CASE("phi table csv round trip and kappa mismatch rejection") {
    const PhiTable& t = test_phi_table();
    write_phi_csv("test_phi.csv", t);
    PhiTable back = read_phi_csv("test_phi.csv", t.kappa);
    REQUIRE(back.theta.size() == t.theta.size());
    REQUIRE(back.s.size() == t.s.size());
    for (size_t i = 0; i < t.phi.size(); ++i) CHECK(back.phi[i] == t.phi[i]);
    CHECK(back.censor_frac.size() == t.censor_frac.size());
    CHECK_THROWS(read_phi_csv("test_phi.csv", 4.0));
    std::remove("test_phi.csv");
}

TEST_CASE("green_t laws") {
    const PhiTable& t = test_phi_table();
    KappaParams p = kappa_params(8.0 / 3.0);
    // exact zero when Im(z)^2 >= 2at
    CHECK(green_t(Complex(0, 1), 0.5 / p.a, t, p) == 0.0);
    CHECK(green_t(Complex(0.4, 1), 0.2, t, p) == 0.0);
    // bounded by G and approaching it for large t
    const Complex z(0.2, 0.8);
    const double g = green_h(z, p);
    const double gt1 = green_t(z, 1.0, t, p);
    const double gt_large = green_t(z, 60.0, t, p);
    CHECK(gt1 > 0.0);
    CHECK(gt1 <= g);
    CHECK(gt_large <= g);
    CHECK(gt_large >= 0.9 * g);
    CHECK(gt_large >= gt1);
    // scaling within interpolation error
    const double lhs = green_t(2.0 * z, 4.0 * 1.0, t, p);
    const double rhs = std::pow(2.0, p.d - 2.0) * gt1;
    CHECK(lhs == doctest::Approx(rhs).epsilon(0.05));
    // out-of-grid requests fail loudly
    CHECK_THROWS_AS(green_t(Complex(0, 1e-4), 1e3, t, p), TableRange);
}

TEST_CASE("mart_weight along a trajectory") {
    const PhiTable& t = test_phi_table();
    KappaParams p = kappa_params(8.0 / 3.0);
    DrivingPath d = sample_chordal(p, 0.5, 1e-3, 21);
    const Complex z(0.1, 0.4);
    FlowTrajectory tr = advance_flow(d, z);
    const double t_total = 0.5;
    // k = 0 reduces to G^{t}(z)
    CHECK(mart_weight(tr, 0, t_total, t, p) == doctest::Approx(green_t(z, t_total, t, p)));
    // zero at exhausted time budget
    CHECK(mart_weight(tr, tr.points() - 1, d.dt * (tr.points() - 1), t, p) == 0.0);
    // nonnegative along the way
    for (size_t k = 0; k < tr.points(); k += 50)
        CHECK(mart_weight(tr, k, t_total, t, p) >= 0.0);
}

TEST_CASE("two_point_envelope structure") {
    KappaParams p = kappa_params(8.0 / 3.0);
    const Complex z(0.05, 0.1), w(0, 1);
    // swap invariance
    CHECK(two_point_envelope(z, w, p) == doctest::Approx(two_point_envelope(w, z, p)));
    // bulk separation: factor ~ G G q^{d-2} S^{-beta}
    const double q = std::abs(w - z) / std::abs(w);
    const double expected = green_h(z, p) * green_h(w, p) * std::pow(q, p.d - 2.0) *
                            std::pow(std::max(1.0, q), -p.beta);
    CHECK(two_point_envelope(z, w, p) == doctest::Approx(expected));
    // w = rz with r large: q -> 1, S(w) = S(z) fixed by the ray
    const Complex zr(0, 1);
    const Complex wr = 1000.0 * zr;
    CHECK(two_point_envelope(zr, wr, p) ==
          doctest::Approx(green_h(zr, p) * green_h(wr, p)).epsilon(0.01));
    CHECK_THROWS_AS(two_point_envelope(zr, zr, p), CoincidentPoints);
}

TEST_CASE("green2_hat_mc symmetry oracle at small n") {
    KappaParams p = kappa_params(8.0 / 3.0);
    const Complex z(0, 0.8), w(0.4, 1.1);
    Green2Result ab1 = green2_hat_mc(z, w, p, 300, 100, -1.0, 5e-4, 2);
    Green2Result ab2 = green2_hat_mc(w, z, p, 300, 101, -1.0, 5e-4, 2);
    Green2Result ba1 = green2_hat_mc(w, z, p, 300, 102, -1.0, 5e-4, 2);
    Green2Result ba2 = green2_hat_mc(z, w, p, 300, 103, -1.0, 5e-4, 2);
    const double sum1 = ab1.estimate.mean + ab2.estimate.mean;
    const double sum2 = ba1.estimate.mean + ba2.estimate.mean;
    const double err = std::sqrt(ab1.estimate.stderr_ * ab1.estimate.stderr_ +
                                 ab2.estimate.stderr_ * ab2.estimate.stderr_ +
                                 ba1.estimate.stderr_ * ba1.estimate.stderr_ +
                                 ba2.estimate.stderr_ * ba2.estimate.stderr_);
    CHECK(std::fabs(sum1 - sum2) <= 3.0 * err);
    CHECK(ab1.censor_frac < 0.05);
}
