#include <benchmark/benchmark.h>

#include "examples.hpp"
#include "ltm/annuli.hpp"
#include "ltm/orbits.hpp"
#include "ltm/twist.hpp"

using namespace ltm;
using namespace ltm::testing;

namespace {

void BM_VectorField(benchmark::State& state) {
    const auto sys = ex18().sys1;
    Vec2 p{0.7, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::vector_field(sys, p));
    }
}
BENCHMARK(BM_VectorField);

void BM_Hamiltonian(benchmark::State& state) {
    const auto sys = bio_k().sys1;
    Vec2 p{0.7, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::hamiltonian(sys, p));
    }
}
BENCHMARK(BM_Hamiltonian);

void BM_FlowOnePeriod(benchmark::State& state) {
    const auto c = ex18();
    const auto line = orbits::default_section_line(c.sys1);
    const auto [pm, pp] = orbits::section_points(c.sys1, c.e1, line);
    const double tau = c.tau_golden[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(ode::flow_endpoint(c.sys1, pp, tau));
    }
}
BENCHMARK(BM_FlowOnePeriod);

void BM_Period(benchmark::State& state) {
    const auto c = ex18();
    for (auto _ : state) {
        benchmark::DoNotOptimize(orbits::period(c.sys1, c.e1));
    }
}
BENCHMARK(BM_Period);

void BM_SectionPoints(benchmark::State& state) {
    const auto c = bio_r();
    const auto line = orbits::section_line(c.sys1, c.sys2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(orbits::section_points(c.sys1, c.e1, line));
    }
}
BENCHMARK(BM_SectionPoints);

void BM_RotationNumber(benchmark::State& state) {
    const auto c = ex18();
    const auto line = orbits::default_section_line(c.sys1);
    const auto [pm, pp] = orbits::section_points(c.sys1, c.e1, line);
    const Vec2 s = models::center(c.sys1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(orbits::rotation_number(c.sys1, pp, 10.0, s));
    }
}
BENCHMARK(BM_RotationNumber);

void BM_LinkCertificate(benchmark::State& state) {
    const auto c = ex18();
    for (auto _ : state) {
        benchmark::DoNotOptimize(annuli::certify_link(annulus1(c), annulus2(c)));
    }
}
BENCHMARK(BM_LinkCertificate)->Unit(benchmark::kMillisecond);

void BM_PoincareMap(benchmark::State& state) {
    const auto c = ex18();
    const auto sched = twist::make_schedule(c.sys1, c.sys2, 182.5, 182.5);
    const Vec2 x0{0.89, 0.55};
    for (auto _ : state) {
        benchmark::DoNotOptimize(twist::poincare(sched, x0));
    }
}
BENCHMARK(BM_PoincareMap)->Unit(benchmark::kMillisecond);

}  // namespace
