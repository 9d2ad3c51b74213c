#pragma once

#include <vector>

#include "ltm/dopri5.hpp"
#include "ltm/models.hpp"

namespace ltm::ode {

/// Piecewise-smooth solution trace. States are strictly interior samples at
/// roughly cfg.dense_resolution per time unit, endpoints always included.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec2> states;
    double energy_drift = 0.0;  // max |H(x(t)) - H(x(0))| over the samples
};

/// Step cap keeping a handful of steps per revolution; needed by the
/// crossing detector and the angle unwrapping.
double auto_max_step(const models::SystemSpec& sys);

IntegratorConfig with_auto_step(const models::SystemSpec& sys, IntegratorConfig cfg);

Trajectory flow(const models::SystemSpec& sys, Vec2 x0, double t,
                const IntegratorConfig& cfg = {});

/// States at the given increasing times (dense output, no storage overhead).
std::vector<Vec2> flow_at_times(const models::SystemSpec& sys, Vec2 x0,
                                const std::vector<double>& times,
                                const IntegratorConfig& cfg = {});

/// Endpoint of the flow after time t (no trace kept).
Vec2 flow_endpoint(const models::SystemSpec& sys, Vec2 x0, double t,
                   const IntegratorConfig& cfg = {});

struct Crossing {
    double time;
    Vec2 point;
};

/// First crossing of the oriented line after t=0 in the given signed
/// direction (+1: offset rises through 0, -1: falls, 0: either). Starting on
/// the line is allowed; the t=0 touch is not counted.
Crossing first_crossing(const models::SystemSpec& sys, Vec2 x0, const Line& line,
                        int direction, const IntegratorConfig& cfg = {});

}  // namespace ltm::ode
