#include "ltm/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ltm/detail/observers.hpp"

namespace ltm::orbits {

using models::Rotation;
using models::SystemSpec;
using models::Variant;

namespace {

void check_on_line(const SectionLine& line, Vec2 c) {
    if (std::abs(line.line.offset(c)) > 1e-9)
        throw ValidationError("system center does not lie on the section line");
}

/// Max ray length from c along u before leaving the open rectangle.
double ray_bound(const SystemSpec& sys, Vec2 c, Vec2 u) {
    double b = 1e300;
    if (u.x > 0.0) b = std::min(b, (sys.domain.x - c.x) / u.x);
    if (u.x < 0.0) b = std::min(b, -c.x / u.x);
    if (u.y > 0.0) b = std::min(b, (sys.domain.y - c.y) / u.y);
    if (u.y < 0.0) b = std::min(b, -c.y / u.y);
    return b;
}

/// Root of H(c + s*u) = e for s in (0, bound); H is increasing along the ray.
Vec2 ray_root(const SystemSpec& sys, Vec2 c, Vec2 u, double e) {
    const double bound = ray_bound(sys, c, u) * (1.0 - 1e-9);
    const auto f = [&](double s) { return models::hamiltonian(sys, c + s * u) - e; };

    double hi = bound * 1e-3;
    while (f(hi) < 0.0) {
        if (hi >= bound) {
            std::ostringstream os;
            os << "level e=" << e << " not bracketed before the domain boundary";
            throw NumericError(os.str());
        }
        hi = std::min(hi * 1.6, bound);
    }
    double lo = 0.0;
    // bisection, then a Newton polish for a residual at machine level
    for (int i = 0; i < 100 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const Vec2 p = c + s * u;
        const double df = dot(models::hamiltonian_gradient(sys, p), u);
        if (df == 0.0) break;
        const double step = (models::hamiltonian(sys, p) - e) / df;
        const double snew = s - step;
        if (snew <= 0.0 || snew >= bound) break;
        s = snew;
    }
    return c + s * u;
}

}  // namespace

SectionLine section_line(const SystemSpec& a, const SystemSpec& b) {
    if (a.variant() != b.variant())
        throw ValidationError("section line requires systems of the same variant");
    const Vec2 S = models::center(a);
    const Vec2 V = models::center(b);

    SectionLine sl;
    switch (a.variant()) {
        case Variant::NegMed: {
            if (dist(S, V) < 1e-9)
                throw ValidationError("NegMed section line needs distinct centers");
            Vec2 dir = normalized(V - S);
            if (dir.x < 0.0) dir = -dir;
            if (std::abs(dir.x) < 1e-12)
                throw ValidationError("centers joined by a vertical line; abscissa order degenerate");
            sl.line = Line{S, dir};
            sl.order_dir = Vec2{1.0, 0.0};
            sl.ordering = LineOrdering::ByAbscissa;
            break;
        }
        case Variant::PosMed: {
            if (dist(S, V) < 1e-9)
                throw ValidationError("PosMed section line needs distinct centers");
            if (std::abs(S.x - V.x) > 1e-9)
                throw ValidationError("PosMed centers must share the abscissa");
            sl.line = Line{S, Vec2{0.0, 1.0}};
            sl.order_dir = Vec2{0.0, -1.0};
            sl.ordering = LineOrdering::ByOrdinateReversed;
            break;
        }
        case Variant::Bio: {
            if (dist(S, V) > 1e-9)
                throw ValidationError("bio systems must share the center");
            sl.line = Line{S, Vec2{1.0, 0.0}};
            sl.order_dir = Vec2{1.0, 0.0};
            sl.ordering = LineOrdering::ByAbscissaAtFixedOrdinate;
            break;
        }
    }
    // orient the ordering so the first system's center comes first; swapping
    // the arguments then reads the same chain right to left
    if (a.variant() != Variant::Bio && dot(S, sl.order_dir) > dot(V, sl.order_dir))
        sl.order_dir = -sl.order_dir;
    return sl;
}

SectionLine default_section_line(const SystemSpec& sys) {
    SectionLine sl;
    sl.line = Line{models::center(sys), Vec2{1.0, 0.0}};
    sl.order_dir = Vec2{1.0, 0.0};
    sl.ordering = LineOrdering::ByAbscissa;
    return sl;
}

std::pair<Vec2, Vec2> section_points(const SystemSpec& sys, double e, const SectionLine& line) {
    const Vec2 c = models::center(sys);
    check_on_line(line, c);
    const double e0 = models::min_energy(sys);
    if (!(e > e0)) {
        std::ostringstream os;
        os << "no level curve: e=" << e << " is not above the minimum energy e0=" << e0;
        throw ValidationError(os.str());
    }
    const Vec2 a = ray_root(sys, c, line.line.dir, e);
    const Vec2 b = ray_root(sys, c, -line.line.dir, e);
    if (line.order_coord(a) < line.order_coord(b)) return {a, b};
    return {b, a};
}

double period(const SystemSpec& sys, double e, const ode::IntegratorConfig& cfg) {
    const SectionLine line = default_section_line(sys);
    const auto [pm, pp] = section_points(sys, e, line);
    const Vec2 f0 = models::vector_field(sys, pp);
    const double gdot = cross(line.line.dir, f0);
    const int dir = gdot > 0.0 ? 1 : -1;
    return ode::first_crossing(sys, pp, line.line, dir, cfg).time;
}

EnergyLevel energy_level(const SystemSpec& sys, double e, const SectionLine& line,
                         const ode::IntegratorConfig& cfg) {
    EnergyLevel lvl;
    lvl.e = e;
    std::tie(lvl.p_minus, lvl.p_plus) = section_points(sys, e, line);
    lvl.tau = period(sys, e, cfg);
    return lvl;
}

double rotation_number(const SystemSpec& sys, Vec2 x0, double t, Vec2 center_ref,
                       const ode::IntegratorConfig& cfg0) {
    if (dist(x0, center_ref) < 1e-9)
        throw ValidationError("rotation number undefined at the reference center");
    if (t == 0.0) return 0.0;
    const ode::IntegratorConfig cfg = ode::with_auto_step(sys, cfg0);
    ode::detail::AngleTracker tracker(center_ref, x0);
    ode::integrate([&](double, Vec2 y) { return models::vector_field(sys, y); },
                   cfg, 0.0, x0, t,
                   [&](const ode::StepRecord& rec) { tracker.process(rec); });
    const double sign =
        models::rotation_direction(sys) == Rotation::CounterClockwise ? 1.0 : -1.0;
    return sign * tracker.delta() / kTwoPi;
}

std::vector<Vec2> orbit_samples(const SystemSpec& sys, double e, int n,
                                const ode::IntegratorConfig& cfg) {
    if (n < 8) throw ValidationError("orbit_samples needs n >= 8");
    const double tau = period(sys, e, cfg);
    const SectionLine line = default_section_line(sys);
    const auto [pm, pp] = section_points(sys, e, line);
    std::vector<double> times(n);
    for (int i = 0; i < n; ++i) times[i] = tau * i / (n - 1);
    return ode::flow_at_times(sys, pp, times, cfg);
}

}  // namespace ltm::orbits
