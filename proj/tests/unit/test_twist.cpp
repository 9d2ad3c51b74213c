#include <doctest.h>

#include <cmath>

#include "examples.hpp"
#include "ltm/twist.hpp"

using namespace ltm;
using namespace ltm::testing;
using namespace ltm::twist;

namespace {

const annuli::LinkCertificate& cert18() {
    static const auto cert = annuli::certify_link(annulus1(ex18()), annulus2(ex18()));
    return cert;
}

const annuli::LinkCertificate& cert_bio() {
    static const auto cert = annuli::certify_link(annulus1(bio_r()), annulus2(bio_r()));
    return cert;
}

/// |got - printed| within half of the printed value's last digit, floored
/// at 5e-3.
bool matches_print(double got, double printed) {
    double digits = printed;
    int decimals = 0;
    while (decimals < 6 && std::abs(digits - std::round(digits)) > 1e-9) {
        digits *= 10;
        ++decimals;
    }
    const double half_ulp = 0.5 * std::pow(10.0, -decimals);
    return std::abs(got - printed) <= std::max(half_ulp, 5e-3);
}

}  // namespace

TEST_CASE("threshold formula reproduces all eight published bounds from their inputs") {
    const auto check = [](double t1a, double t1b, double t2a, double t2b,
                          models::Variant v, double thr1, double thr2) {
        const auto r = thresholds(t1a, t1b, t2a, t2b, v);
        CHECK(matches_print(r.T1_min, thr1));
        CHECK(matches_print(r.T2_min, thr2));
    };
    check(3.2, 3.8, 3.0, 3.3, models::Variant::NegMed, 111.467, 148.500);
    check(7.8, 11.3, 3.6, 4.5, models::Variant::PosMed, 138.5, 81.0);
    check(1.055, 1.195, 1.06, 1.095, models::Variant::Bio, 40.52, 116.07);
    check(0.355, 0.360, 0.635, 0.650, models::Variant::Bio, 115.02, 96.31);
}

TEST_CASE("threshold formula is exact closed-form algebra") {
    const auto r = thresholds(3.2, 3.8, 3.0, 3.3, models::Variant::NegMed);
    CHECK(r.c1 == 11.0);
    CHECK(r.c2 == 9.0);
    CHECK(r.T1_min == doctest::Approx(11.0 * 3.2 * 3.8 / (2.0 * 0.6)).epsilon(1e-9));
    CHECK(r.T2_min == doctest::Approx(9.0 * 3.0 * 3.3 / (2.0 * 0.3)).epsilon(1e-9));
    const auto rb = thresholds(0.355, 0.360, 0.635, 0.650, models::Variant::Bio);
    CHECK(rb.c1 == 9.0);
    CHECK(rb.c2 == 7.0);
    CHECK_THROWS_AS(thresholds(3.8, 3.2, 3.0, 3.3, models::Variant::NegMed),
                    ValidationError);
}

TEST_CASE("make_schedule validates the switched parameter") {
    const auto c18 = ex18();
    CHECK_NOTHROW(make_schedule(c18.sys1, c18.sys2, 182.5, 182.5));
    CHECK_THROWS_AS(make_schedule(c18.sys1, c18.sys2, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(make_schedule(c18.sys1, ex16().sys1, 1.0, 1.0), ValidationError);

    // a zeta change is not a q_ND switch
    auto other = models::make_system(models::ParamsNeg{5.0, 9.8, 15.2, 18.8});
    CHECK_THROWS_AS(make_schedule(c18.sys1, other, 1.0, 1.0), ValidationError);

    const auto cb = bio_r();
    CHECK_NOTHROW(make_schedule(cb.sys1, cb.sys2, 10.0, 10.0));
    auto both = models::make_system(models::ParamsBio{16, 32, 24, 30, 0.5, 2.0, 0.95, 1.0});
    CHECK_THROWS_AS(make_schedule(cb.sys1, both, 1.0, 1.0), ValidationError);
}

TEST_CASE("poincare map composes the two phase flows") {
    const auto c = ex18();
    const auto& cert = cert18();
    const auto& A = cert.rectangles[0];
    const Vec2 x0 = 0.25 * (A.corners[0] + A.corners[1] + A.corners[2] + A.corners[3]);

    // full-period phases land back on the start
    const double h1 = models::hamiltonian(c.sys1, x0);
    const double tau1 = orbits::period(c.sys1, h1);
    const Vec2 x_mid = ode::flow_endpoint(c.sys1, x0, tau1);
    CHECK(dist(x_mid, x0) < 1e-6);
    const double h2 = models::hamiltonian(c.sys2, x_mid);
    const double tau2 = orbits::period(c.sys2, h2);
    const auto sched = make_schedule(c.sys1, c.sys2, tau1, tau2);
    CHECK(dist(poincare(sched, x0), x0) < 1e-5);

    // phase-wise energy conservation at arbitrary durations
    const auto sched2 = make_schedule(c.sys1, c.sys2, 17.3, 11.9);
    const Vec2 mid = ode::flow_endpoint(c.sys1, x0, sched2.T1);
    CHECK(models::hamiltonian(c.sys1, mid) == doctest::Approx(h1).epsilon(1e-9));
    const Vec2 end = poincare(sched2, x0);
    CHECK(models::hamiltonian(c.sys2, end) ==
          doctest::Approx(models::hamiltonian(c.sys2, mid)).epsilon(1e-9));
}

TEST_CASE("the first-phase center is fixed by phase one and carried by phase two") {
    const auto c = ex18();
    const Vec2 S = models::center(c.sys1);
    const auto sched = make_schedule(c.sys1, c.sys2, 33.0, 21.0);
    const Vec2 out = poincare(sched, S);
    // phase 1 leaves S alone; phase 2 moves it along its own level curve
    CHECK(models::hamiltonian(c.sys2, out) ==
          doctest::Approx(models::hamiltonian(c.sys2, S)).epsilon(1e-9));
    CHECK(dist(out, S) > 1e-3);
}

TEST_CASE("annulus invariance under the matching phase map") {
    const auto c = ex16();
    const auto line = orbits::section_line(c.sys1, c.sys2);
    const auto [pm, pp] = orbits::section_points(c.sys1, c.e1, line);
    const Vec2 img = ode::flow_endpoint(c.sys1, pp, 47.0);
    // conserved within the integrator drift bound over ~6 revolutions
    CHECK(std::abs(models::hamiltonian(c.sys1, img) - c.e1) < 1e-7);
}

TEST_CASE("stretch certificate passes at the example switching times") {
    const auto c = ex18();
    const auto sched = make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    const auto sc = verify_stretch(sched, cert18(), 0, 1, 256);
    CHECK(sc.forward.span > 5 * kPi);
    CHECK(sc.forward.complete_crossings() >= 2);
    CHECK(sc.backward.span > 3 * kPi);
    CHECK(sc.backward.complete_crossings() >= 1);
    CHECK(sc.pass());
    // the witness intervals are disjoint and ordered
    REQUIRE(sc.forward.crossings.size() >= 2);
    const auto& h0 = sc.forward.crossings[0];
    const auto& h1 = sc.forward.crossings[1];
    CHECK(h0.lam_hi < h1.lam_lo);
    CHECK(h0.side_lo != h0.side_hi);
}

TEST_CASE("degenerate schedules fail the stretch check") {
    const auto c = ex18();
    // zero-duration phases: identity maps; spans collapse, no crossings
    const SwitchSchedule sched{c.sys1, c.sys2, 0.0, 0.0};
    const auto sc = verify_stretch(sched, cert18(), 0, 1, 256);
    CHECK_FALSE(sc.forward.span_ok());
    CHECK(sc.forward.complete_crossings() == 0);
    CHECK_FALSE(sc.pass());
}

TEST_CASE("n_path precondition") {
    const auto c = ex18();
    const auto sched = make_schedule(c.sys1, c.sys2, 1.0, 1.0);
    CHECK_THROWS_AS(verify_stretch(sched, cert18(), 0, 1, 128), ValidationError);
}

TEST_CASE("rotation gap obeys the floor/ceiling bound on five schedules") {
    struct Case {
        models::SystemSpec sys;
        double e1, e2;
        double c_over_2;
    };
    const auto e18 = ex18();
    const auto e16 = ex16();
    const auto br = bio_r();
    const auto bk = bio_k();
    const std::vector<Case> cases = {
        {e18.sys1, e18.e1, e18.e2, 11.0 / 2},
        {e16.sys1, e16.e1, e16.e2, 11.0 / 2},
        {e16.sys2, e16.h1, e16.h2, 9.0 / 2},
        {br.sys1, br.e1, br.e2, 9.0 / 2},
        {bk.sys2, bk.h1, bk.h2, 7.0 / 2},
    };
    for (const auto& k : cases) {
        const double tau1 = orbits::period(k.sys, k.e1);
        const double tau2 = orbits::period(k.sys, k.e2);
        const double t_min = k.c_over_2 * tau1 * tau2 / (tau2 - tau1);
        const auto line = orbits::default_section_line(k.sys);
        const auto [p1m, p1p] = orbits::section_points(k.sys, k.e1, line);
        const auto [p2m, p2p] = orbits::section_points(k.sys, k.e2, line);
        const Vec2 s = models::center(k.sys);
        const double rot0 = orbits::rotation_number(k.sys, p1p, t_min, s);
        const double rot1 = orbits::rotation_number(k.sys, p2p, t_min, s);
        const double floor_ceil = std::floor(t_min / tau1) - std::ceil(t_min / tau2);
        CHECK(rot0 - rot1 >= floor_ceil - 1e-6);
        CHECK(floor_ceil > t_min * (tau2 - tau1) / (tau1 * tau2) - 2.0 - 1e-9);
        CHECK(rot0 - rot1 > k.c_over_2 - 2.0 - 1e-6);
    }
}

TEST_CASE("crossing counts do not decrease with the phase duration") {
    const auto c = ex18();
    const auto thr = thresholds(c.tau_golden[0], c.tau_golden[1], c.tau_golden[2],
                                c.tau_golden[3], models::Variant::NegMed);
    int prev = 0;
    for (double f : {1.0, 1.5, 2.0}) {
        const auto sched = make_schedule(c.sys1, c.sys2, f * thr.T1_min, f * thr.T2_min);
        const auto sc = verify_stretch(sched, cert18(), 0, 1, 256);
        CHECK(sc.forward.complete_crossings() >= prev);
        prev = sc.forward.complete_crossings();
    }
    CHECK(prev >= 2);
}

TEST_CASE("clockwise systems produce the same certificate structure") {
    const auto c = ex16();
    const auto cert = annuli::certify_link(annulus1(c), annulus2(c));
    const auto sched = make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    const auto sc = verify_stretch(sched, cert, 0, 1, 256);
    CHECK(sc.forward.span > 5 * kPi);  // positive span under the reversed convention
    CHECK(sc.backward.span > 3 * kPi);
    CHECK(sc.pass());
}

TEST_CASE("stretch crossing counts are stable under 4x path resolution (oracle)") {
    const auto c = bio_r();
    const auto sched = make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    const auto coarse = verify_stretch(sched, cert_bio(), 0, 1, 256);
    const auto dense = verify_stretch(sched, cert_bio(), 0, 1, 1024);
    CHECK(coarse.forward.complete_crossings() == dense.forward.complete_crossings());
    CHECK(coarse.backward.complete_crossings() == dense.backward.complete_crossings());
    CHECK(coarse.pass());
    CHECK(dense.pass());
}

TEST_CASE("zero-budget perturbation reproduces the certificate bitwise") {
    const auto c = ex18();
    const auto thr = thresholds(c.tau_golden[0], c.tau_golden[1], c.tau_golden[2],
                                c.tau_golden[3], models::Variant::NegMed);
    const auto sched = make_schedule(c.sys1, c.sys2, 1.05 * thr.T1_min, 1.05 * thr.T2_min);
    const auto base = verify_stretch(sched, cert18(), 0, 1, 256);
    REQUIRE(base.pass());
    const auto zero =
        perturb_and_recheck(sched, cert18(), 0, 1, 0.0, PerturbShape::SquareWave, 256);
    CHECK(bitwise_equal(base, zero));
}

TEST_CASE("small L1 jitter keeps the certificate; large jitter breaks the regime") {
    const auto c = ex18();
    const auto sched = make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    const double T = sched.period();
    const auto pert = perturb_and_recheck(sched, cert18(), 0, 1, 1e-3 * T,
                                          PerturbShape::SmoothBump, 256);
    CHECK(pert.pass());
    CHECK_THROWS_AS(perturb_and_recheck(sched, cert18(), 0, 1, 3.0 * T,
                                        PerturbShape::SquareWave, 256),
                    ValidationError);
}

TEST_CASE("perturb_and_recheck requires a passing base certificate") {
    const auto c = ex18();
    const auto sched = make_schedule(c.sys1, c.sys2, 1.0, 1.0);
    CHECK_THROWS_AS(
        perturb_and_recheck(sched, cert18(), 0, 1, 0.0, PerturbShape::SquareWave, 256),
        CertificateError);
}

TEST_CASE("default pairs cover the chaos sets") {
    CHECK(default_rect_pairs(cert18()) ==
          std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
    CHECK(default_rect_pairs(cert_bio()) ==
          std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

TEST_CASE("single-symbol itineraries return an interior witness") {
    const auto c = ex18();
    const auto sched = make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    const auto res = itinerary_demo(sched, cert18(), {0}, 256);
    CHECK(res.verified);
    CHECK(annuli::rect_contains(cert18(), cert18().rectangles[0], res.x0, 1e-8));
}

TEST_CASE("three-symbol itinerary is realized and re-verified by direct integration") {
    const auto c = ex18();
    const auto sched = make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    const auto res = itinerary_demo(sched, cert18(), {0, 1, 0}, 256);
    REQUIRE(res.iterates.size() == 3);
    CHECK(res.verified);
    // independent re-check of every membership
    Vec2 x = res.x0;
    for (size_t k = 0; k < res.symbols.size(); ++k) {
        CHECK(annuli::rect_contains(cert18(), cert18().rectangles[res.symbols[k]], x, 1e-8));
        CHECK(dist(x, res.iterates[k]) == 0.0);
        if (k + 1 < res.symbols.size()) x = poincare(sched, x);
    }
}

TEST_CASE("itineraries demand passing stretch certificates") {
    const auto c = ex18();
    const auto sched = make_schedule(c.sys1, c.sys2, 1.0, 1.0);
    CHECK_THROWS_AS(itinerary_demo(sched, cert18(), {0, 1}, 256), ValidationError);
    const auto good = make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    CHECK_THROWS_AS(itinerary_demo(good, cert18(), {0, 1, 0, 1, 0, 1, 0}, 256),
                    ValidationError);  // depth > 6
    CHECK_THROWS_AS(itinerary_demo(good, cert18(), {0, 7}, 256), ValidationError);
}
