#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "examples.hpp"
#include "ltm/orbits.hpp"

using namespace ltm;
using namespace ltm::testing;
using namespace ltm::orbits;

TEST_CASE("section points sit on the level and straddle the center") {
    for (const auto& c : all_examples()) {
        const auto line = section_line(c.sys1, c.sys2);
        for (const auto* sys : {&c.sys1, &c.sys2}) {
            const double e = (sys == &c.sys1 ? c.e1 : c.h1);
            const double e0 = models::min_energy(*sys);
            const auto [pm, pp] = section_points(*sys, e, line);
            CHECK(std::abs(models::hamiltonian(*sys, pm) - e) <= 1e-10 * (e - e0));
            CHECK(std::abs(models::hamiltonian(*sys, pp) - e) <= 1e-10 * (e - e0));
            CHECK(std::abs(line.line.offset(pm)) < 1e-9);
            CHECK(std::abs(line.line.offset(pp)) < 1e-9);
            const double cc = line.order_coord(models::center(*sys));
            CHECK(line.order_coord(pm) < cc);
            CHECK(line.order_coord(pp) > cc);
        }
    }
}

TEST_CASE("section points against an independent 1D bisection oracle") {
    // vertical line d = 0.5 for the clockwise example; restrict H to the line
    // and bisect by hand above and below the center
    const auto c = ex16();
    const auto line = section_line(c.sys1, c.sys2);
    const Vec2 S = models::center(c.sys1);
    const double e = c.e2;

    const auto H_on_line = [&](double y) {
        return models::hamiltonian(c.sys1, {S.x, y});
    };
    const auto bisect = [&](double lo, double hi) {
        const bool rising = H_on_line(hi) > H_on_line(lo);
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const bool above = H_on_line(mid) > e;
            if (above == rising) hi = mid; else lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double y_hi = bisect(S.y, 1.0 - 1e-9);
    const double y_lo = bisect(1e-9, S.y);

    const auto [pm, pp] = section_points(c.sys1, e, line);
    // ordering is by reversed ordinate: "minus" is the upper point
    CHECK(pm.y == doctest::Approx(y_hi).epsilon(1e-10));
    CHECK(pp.y == doctest::Approx(y_lo).epsilon(1e-10));
}

TEST_CASE("levels barely above the minimum shrink to the center") {
    const auto sys = ex18().sys1;
    const double e0 = models::min_energy(sys);
    const auto line = default_section_line(sys);
    const auto [pm, pp] = section_points(sys, e0 + 1e-12, line);
    const Vec2 s = models::center(sys);
    CHECK(dist(pm, s) < 1e-4);
    CHECK(dist(pp, s) < 1e-4);
}

TEST_CASE("levels below the minimum are rejected") {
    const auto sys = ex18().sys1;
    const double e0 = models::min_energy(sys);
    CHECK_THROWS_AS(section_points(sys, e0 - 0.1, default_section_line(sys)), ValidationError);
}

TEST_CASE("periods match the independently computed golden values") {
    for (const auto& c : all_examples()) {
        CHECK(period(c.sys1, c.e1) == doctest::Approx(c.tau_golden[0]).epsilon(1e-8));
        CHECK(period(c.sys1, c.e2) == doctest::Approx(c.tau_golden[1]).epsilon(1e-8));
        CHECK(period(c.sys2, c.h1) == doctest::Approx(c.tau_golden[2]).epsilon(1e-8));
        CHECK(period(c.sys2, c.h2) == doctest::Approx(c.tau_golden[3]).epsilon(1e-8));
    }
}

TEST_CASE("period approaches the linearized limit near the center") {
    for (const auto& c : all_examples()) {
        const double e0 = models::min_energy(c.sys1);
        const double scale = c.e1 - e0;
        const double tau = period(c.sys1, e0 + 1e-6 * scale);
        const double lim = kTwoPi / models::linearized_frequency(c.sys1);
        CHECK(tau == doctest::Approx(lim).epsilon(1e-2));
        const double tau_wider = period(c.sys1, e0 + 1e-2 * scale);
        CHECK(tau_wider > lim);  // approaches the limit from above
    }
}

TEST_CASE("period is strictly increasing in the energy") {
    for (const auto& c : all_examples()) {
        for (const auto* sys : {&c.sys1, &c.sys2}) {
            const double e0 = models::min_energy(*sys);
            const double emax = (sys == &c.sys1 ? c.e2 : c.h2);
            double prev = 0.0;
            for (int k = 1; k <= 20; ++k) {
                const double e = e0 + (emax - e0) * k / 20.0;
                const double tau = period(*sys, e);
                CHECK(tau > prev);
                prev = tau;
            }
        }
    }
}

TEST_CASE("rotation number identities on the orbit") {
    for (const auto& c : {ex18(), bio_r()}) {
        const Vec2 s = models::center(c.sys1);
        for (int k = 1; k <= 5; ++k) {
            const double e = c.e1 + (c.e2 - c.e1) * (k - 1) / 4.0;
            const double tau = period(c.sys1, e);
            const auto line = default_section_line(c.sys1);
            const auto [pm, pp] = section_points(c.sys1, e, line);
            for (int n = 1; n <= 3; ++n) {
                const double r = rotation_number(c.sys1, pp, n * tau, s);
                CHECK(r == doctest::Approx(static_cast<double>(n)).epsilon(1e-6));
            }
            const double r_half = rotation_number(c.sys1, pp, 1.5 * tau, s);
            CHECK(r_half > 1.0);
            CHECK(r_half < 2.0);
        }
    }
    // clockwise systems count clockwise turns positive
    const auto c16 = ex16();
    const auto line = default_section_line(c16.sys1);
    const auto [pm, pp] = section_points(c16.sys1, c16.e1, line);
    const double tau = period(c16.sys1, c16.e1);
    const double r = rotation_number(c16.sys1, pp, 2.0 * tau, models::center(c16.sys1));
    CHECK(r == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("rotation number is zero at t=0 and rejects the center") {
    const auto c = ex18();
    CHECK(rotation_number(c.sys1, {0.5, 0.5}, 0.0, models::center(c.sys1)) == 0.0);
    CHECK_THROWS_AS(
        rotation_number(c.sys1, models::center(c.sys1), 1.0, models::center(c.sys1)),
        ValidationError);
}

TEST_CASE("nested energies give nested section points") {
    for (const auto& c : all_examples()) {
        const auto line = section_line(c.sys1, c.sys2);
        const auto [am, ap] = section_points(c.sys1, c.e1, line);
        const auto [bm, bp] = section_points(c.sys1, c.e2, line);
        CHECK(line.order_coord(bm) < line.order_coord(am));
        CHECK(line.order_coord(ap) < line.order_coord(bp));
    }
}

TEST_CASE("orbit samples stay on the level and close up") {
    for (const auto& c : {ex18(), bio_k()}) {
        const double e = c.e1;
        const double e0 = models::min_energy(c.sys1);
        const auto poly = orbit_samples(c.sys1, e, 256);
        REQUIRE(poly.size() == 256);
        for (const Vec2& p : poly)
            CHECK(std::abs(models::hamiltonian(c.sys1, p) - e) <= 1e-8 * (e - e0));
        CHECK(dist(poly.front(), poly.back()) < 1e-6);
    }
}

TEST_CASE("orbit polyline winding matches the rotation direction") {
    for (const auto& c : all_examples()) {
        for (const auto* sys : {&c.sys1, &c.sys2}) {
            const double e = (sys == &c.sys1 ? c.e1 : c.h1);
            const auto poly = orbit_samples(*sys, e, 512);
            const Vec2 s = models::center(*sys);
            double winding = 0.0;
            for (size_t i = 0; i + 1 < poly.size(); ++i) {
                const Vec2 a = poly[i] - s;
                const Vec2 b = poly[i + 1] - s;
                winding += std::atan2(cross(a, b), dot(a, b));
            }
            const int turns = static_cast<int>(std::lround(winding / kTwoPi));
            const bool ccw =
                models::rotation_direction(*sys) == models::Rotation::CounterClockwise;
            CHECK(turns == (ccw ? 1 : -1));
        }
    }
}

TEST_CASE("small orbit sample counts form a ring around the center") {
    const auto sys = ex18().sys1;
    const double e0 = models::min_energy(sys);
    const auto poly = orbit_samples(sys, e0 + 0.01, 8);
    REQUIRE(poly.size() == 8);
    const Vec2 s = models::center(sys);
    for (const Vec2& p : poly) CHECK(dist(p, s) < 0.2);
    CHECK_THROWS_AS(orbit_samples(sys, e0 + 0.01, 7), ValidationError);
}

TEST_CASE("energy level bundles period and section points") {
    const auto c = bio_r();
    const auto line = section_line(c.sys1, c.sys2);
    const auto lvl = energy_level(c.sys1, c.e1, line);
    CHECK(lvl.tau == doctest::Approx(c.tau_golden[0]).epsilon(1e-8));
    CHECK(lvl.tau > kTwoPi / models::linearized_frequency(c.sys1));
    CHECK(line.order_coord(lvl.p_minus) < line.order_coord(lvl.p_plus));
}
