#pragma once

#include <utility>
#include <vector>

#include "ltm/models.hpp"
#include "ltm/ode.hpp"

namespace ltm::orbits {

enum class LineOrdering { ByAbscissa, ByOrdinateReversed, ByAbscissaAtFixedOrdinate };

/// Reference line through the center(s) with the variant's ordering
/// convention. line.dir doubles as the x-axis of the rotated frames used for
/// angle bookkeeping; order_dir realizes the "comes before" comparison.
struct SectionLine {
    Line line;
    Vec2 order_dir;
    LineOrdering ordering = LineOrdering::ByAbscissa;

    double order_coord(Vec2 p) const { return dot(p, order_dir); }
    Frame frame_at(Vec2 center) const { return Frame{center, line.dir}; }
};

/// Line joining the two centers (game variants) or the horizontal line
/// through the shared center (bio), with the matching ordering.
SectionLine section_line(const models::SystemSpec& a, const models::SystemSpec& b);

/// Horizontal line through the system's own center; used where only one
/// system is involved (periods, orbit sampling).
SectionLine default_section_line(const models::SystemSpec& sys);

/// The two intersections of {H=e} with the line, ordered so that
/// first "comes before" the center and second after.
std::pair<Vec2, Vec2> section_points(const models::SystemSpec& sys, double e,
                                     const SectionLine& line);

/// Orbit period of {H=e}: time between two successive same-direction
/// crossings of a line through the center, starting on the line.
double period(const models::SystemSpec& sys, double e,
              const ode::IntegratorConfig& cfg = {});

struct EnergyLevel {
    double e = 0.0;
    double tau = 0.0;
    Vec2 p_minus, p_plus;
};

EnergyLevel energy_level(const models::SystemSpec& sys, double e, const SectionLine& line,
                         const ode::IntegratorConfig& cfg = {});

/// Normalized angular displacement about center_ref after time t, signed so
/// the system's natural orbit direction counts positive.
double rotation_number(const models::SystemSpec& sys, Vec2 x0, double t, Vec2 center_ref,
                       const ode::IntegratorConfig& cfg = {});

/// Closed polyline tracing {H=e}: n points at equal time spacing over one
/// period, last point returning to the first.
std::vector<Vec2> orbit_samples(const models::SystemSpec& sys, double e, int n,
                                const ode::IntegratorConfig& cfg = {});

}  // namespace ltm::orbits
