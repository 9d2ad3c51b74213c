#include "ltm/ode.hpp"

#include <algorithm>
#include <cmath>

#include "ltm/detail/observers.hpp"

namespace ltm::ode {

using models::SystemSpec;

namespace {

struct SystemField {
    SystemSpec sys;
    Vec2 operator()(double, Vec2 y) const { return models::vector_field(sys, y); }
};

}  // namespace

double auto_max_step(const SystemSpec& sys) {
    return kTwoPi / models::linearized_frequency(sys) / 8.0;
}

IntegratorConfig with_auto_step(const SystemSpec& sys, IntegratorConfig cfg) {
    const double cap = auto_max_step(sys);
    if (cfg.max_step <= 0.0 || cfg.max_step > cap) cfg.max_step = cap;
    return cfg;
}

Trajectory flow(const SystemSpec& sys, Vec2 x0, double t, const IntegratorConfig& cfg0) {
    if (t < 0.0) throw ValidationError("flow horizon must be non-negative");
    if (!models::inside_domain(sys, x0, 1e-12))
        throw DomainError("flow start point not interior");
    const IntegratorConfig cfg = with_auto_step(sys, cfg0);

    Trajectory out;
    out.times.push_back(0.0);
    out.states.push_back(x0);
    if (t == 0.0) return out;

    const double dt_sample = 1.0 / std::max(cfg.dense_resolution, 1e-6);
    double next_sample = dt_sample;

    integrate(SystemField{sys}, cfg, 0.0, x0, t, [&](const StepRecord& rec) {
        while (next_sample < rec.t1) {
            if (next_sample > rec.t0) {
                out.times.push_back(next_sample);
                out.states.push_back(rec.eval(next_sample));
            }
            next_sample += dt_sample;
        }
        if (rec.t1 >= t) {
            out.times.push_back(rec.t1);
            out.states.push_back(rec.y1);
        }
    });

    const double h0 = models::hamiltonian(sys, x0);
    double drift = 0.0;
    for (const Vec2& p : out.states)
        drift = std::max(drift, std::abs(models::hamiltonian(sys, p) - h0));
    out.energy_drift = drift;
    return out;
}

std::vector<Vec2> flow_at_times(const SystemSpec& sys, Vec2 x0,
                                const std::vector<double>& times,
                                const IntegratorConfig& cfg0) {
    if (times.empty()) return {};
    if (!std::is_sorted(times.begin(), times.end()))
        throw ValidationError("sample times must be increasing");
    if (times.front() < 0.0) throw ValidationError("sample times must be non-negative");
    const IntegratorConfig cfg = with_auto_step(sys, cfg0);

    std::vector<Vec2> out(times.size());
    size_t next = 0;
    while (next < times.size() && times[next] == 0.0) out[next++] = x0;
    if (next == times.size()) return out;

    const double t_end = times.back();
    const Vec2 last = integrate(SystemField{sys}, cfg, 0.0, x0, t_end,
                                [&](const StepRecord& rec) {
        while (next < times.size() && times[next] <= rec.t1) {
            out[next] = (times[next] >= rec.t1) ? rec.y1 : rec.eval(times[next]);
            ++next;
        }
    });
    // grid arithmetic may overshoot t_end by an ulp
    while (next < times.size()) out[next++] = last;
    return out;
}

Vec2 flow_endpoint(const SystemSpec& sys, Vec2 x0, double t, const IntegratorConfig& cfg0) {
    if (t == 0.0) return x0;
    const IntegratorConfig cfg = with_auto_step(sys, cfg0);
    return integrate(SystemField{sys}, cfg, 0.0, x0, t, [](const StepRecord&) {});
}

Crossing first_crossing(const SystemSpec& sys, Vec2 x0, const Line& line,
                        int direction, const IntegratorConfig& cfg0) {
    const Vec2 c = models::center(sys);
    if (dist(x0, c) < 1e-9)
        throw ValidationError("first_crossing: start point coincides with the center");
    if (!models::inside_domain(sys, x0, 1e-12))
        throw DomainError("first_crossing: start point not interior");

    const IntegratorConfig cfg = with_auto_step(sys, cfg0);
    const double t_cap = 10.0 * kTwoPi / models::linearized_frequency(sys);

    detail::CrossingDetector detector(line, direction);
    Dopri5<SystemField> stepper(SystemField{sys}, cfg, 0.0, x0);
    while (stepper.time() < t_cap) {
        const StepRecord& rec = stepper.step_to(t_cap);
        if (auto hit = detector.process(rec)) return *hit;
    }
    throw TimeoutError("no line crossing before the time cap");
}

}  // namespace ltm::ode
