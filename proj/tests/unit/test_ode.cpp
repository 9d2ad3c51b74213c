#include <doctest.h>

#include <cmath>

#include "examples.hpp"
#include "ltm/dopri5.hpp"
#include "ltm/ode.hpp"
#include "ltm/orbits.hpp"

using namespace ltm;
using namespace ltm::testing;

TEST_CASE("zero-horizon flow is a single sample with zero drift") {
    const auto sys = ex18().sys1;
    const Vec2 x0{0.5, 0.5};
    const auto tr = ode::flow(sys, x0, 0.0);
    CHECK(tr.times.size() == 1);
    CHECK(tr.states[0] == x0);
    CHECK(tr.energy_drift == 0.0);
}

TEST_CASE("the center is an equilibrium of the flow") {
    const auto sys = ex16().sys1;
    const Vec2 s = models::center(sys);
    const auto tr = ode::flow(sys, s, 25.0);
    for (const Vec2& p : tr.states) CHECK(dist(p, s) < 1e-12);
}

TEST_CASE("one-period flow returns to the start point") {
    const auto c = ex18();
    const auto line = orbits::default_section_line(c.sys1);
    const auto [pm, pp] = orbits::section_points(c.sys1, 16.9, line);
    const double tau = orbits::period(c.sys1, 16.9);
    CHECK(tau == doctest::Approx(c.tau_golden[0]).epsilon(1e-9));
    const Vec2 end = ode::flow_endpoint(c.sys1, pp, tau);
    CHECK(dist(end, pp) < 1e-6);
}

TEST_CASE("energy drift across one period stays within the contract") {
    for (const auto& c : all_examples()) {
        const double e = c.e2;
        const double tau = orbits::period(c.sys1, e);
        const auto line = orbits::default_section_line(c.sys1);
        const auto [pm, pp] = orbits::section_points(c.sys1, e, line);
        const auto tr = ode::flow(c.sys1, pp, tau);
        const double scale = e - models::min_energy(c.sys1);
        CHECK(tr.energy_drift < 1e-8 * scale);
    }
}

TEST_CASE("time reversal returns to the start") {
    const auto sys = bio_r().sys1;
    const auto line = orbits::default_section_line(sys);
    const auto [pm, pp] = orbits::section_points(sys, 54.0, line);

    const ode::IntegratorConfig cfg = ode::with_auto_step(sys, {});
    const double t = 3.7;
    const Vec2 fwd = ode::integrate(
        [&](double, Vec2 y) { return models::vector_field(sys, y); }, cfg, 0.0, pp, t,
        [](const ode::StepRecord&) {});
    const Vec2 back = ode::integrate(
        [&](double, Vec2 y) { return -1.0 * models::vector_field(sys, y); }, cfg, 0.0, fwd,
        t, [](const ode::StepRecord&) {});
    CHECK(dist(back, pp) < 10.0 * 1e-8);
}

TEST_CASE("halving tolerances moves the period by less than the coarse error estimate") {
    const auto c = ex16();
    ode::IntegratorConfig coarse;
    coarse.rel_tol = 1e-8;
    coarse.abs_tol = 1e-10;
    ode::IntegratorConfig fine;
    fine.rel_tol = 5e-9;
    fine.abs_tol = 5e-11;
    const double tau_coarse = orbits::period(c.sys1, c.e2, coarse);
    const double tau_fine = orbits::period(c.sys1, c.e2, fine);
    const double est = 100.0 * coarse.rel_tol * tau_coarse + 1e-11;
    CHECK(std::abs(tau_coarse - tau_fine) < est);
}

TEST_CASE("dense sampling lands on requested times") {
    const auto sys = ex18().sys1;
    const Vec2 x0{0.5, 0.5};
    const std::vector<double> times{0.0, 0.25, 1.0, 2.5};
    const auto pts = ode::flow_at_times(sys, x0, times);
    REQUIRE(pts.size() == 4);
    CHECK(pts[0] == x0);
    CHECK(dist(pts[3], ode::flow_endpoint(sys, x0, 2.5)) < 1e-9);
}

TEST_CASE("first_crossing: full turn from a point on the line") {
    const auto c = ex18();
    const auto line = orbits::default_section_line(c.sys1);
    const auto [pm, pp] = orbits::section_points(c.sys1, c.e1, line);
    const Vec2 f = models::vector_field(c.sys1, pp);
    const int dir = cross(line.line.dir, f) > 0 ? 1 : -1;
    const auto hit = ode::first_crossing(c.sys1, pp, line.line, dir);
    CHECK(hit.time == doctest::Approx(c.tau_golden[0]).epsilon(1e-8));
    CHECK(std::abs(line.line.offset(hit.point)) < 1e-10);
}

TEST_CASE("first_crossing: opposite-direction crossing comes earlier") {
    const auto c = ex18();
    const auto line = orbits::default_section_line(c.sys1);
    const auto [pm, pp] = orbits::section_points(c.sys1, c.e1, line);
    const Vec2 f = models::vector_field(c.sys1, pp);
    const int dir = cross(line.line.dir, f) > 0 ? 1 : -1;
    const auto half = ode::first_crossing(c.sys1, pp, line.line, -dir);
    const double tau = c.tau_golden[0];
    CHECK(half.time > 0.0);
    CHECK(half.time < tau);
    // the opposite crossing happens on the other side of the center
    CHECK(line.order_coord(half.point) < line.order_coord(models::center(c.sys1)));
}

TEST_CASE("first_crossing rejects the center and times out on unreachable lines") {
    const auto sys = ex18().sys1;
    CHECK_THROWS_AS(ode::first_crossing(sys, models::center(sys),
                                        orbits::default_section_line(sys).line, 0),
                    ValidationError);
    const Line far{{10.0, 10.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(ode::first_crossing(sys, {0.5, 0.5}, far, 0), TimeoutError);
}

TEST_CASE("integrator config validation") {
    ode::IntegratorConfig bad;
    bad.rel_tol = 0.5;
    CHECK_THROWS_AS(ode::flow(ex18().sys1, {0.5, 0.5}, 1.0, bad), ValidationError);
}
