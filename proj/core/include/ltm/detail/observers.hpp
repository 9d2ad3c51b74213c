#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "ltm/dopri5.hpp"
#include "ltm/errors.hpp"
#include "ltm/geometry.hpp"
#include "ltm/ode.hpp"

namespace ltm::ode::detail {

/// Accumulates the unwrapped counterclockwise angle about a center along the
/// dense output, bisecting in time until every increment is below pi/2 so no
/// winding is lost.
class AngleTracker {
  public:
    AngleTracker(Vec2 center, Vec2 y0, double min_radius = 1e-9)
        : center_(center), prev_(y0), min_radius_(min_radius) {
        check_radius(y0);
        theta0_ = std::atan2(y0.y - center.y, y0.x - center.x);
    }

    void process(const StepRecord& rec) {
        advance(rec, rec.t0, prev_, rec.t1, rec.y1, 0);
        prev_ = rec.y1;
    }

    double initial_angle() const { return theta0_; }   // in (-pi, pi]
    double delta() const { return accum_; }            // unwrapped increment
    double angle() const { return theta0_ + accum_; }

  private:
    void check_radius(Vec2 p) const {
        if (dist(p, center_) < min_radius_)
            throw AngleUndefinedError("trajectory too close to the rotation center");
    }

    static double increment(Vec2 a, Vec2 b) {
        return std::atan2(cross(a, b), dot(a, b));
    }

    void advance(const StepRecord& rec, double ta, Vec2 pa, double tb, Vec2 pb, int depth) {
        check_radius(pb);
        const double inc = increment(pa - center_, pb - center_);
        if (std::abs(inc) < kPi / 2 || depth > 48) {
            accum_ += inc;
            return;
        }
        const double tm = 0.5 * (ta + tb);
        const Vec2 pm = rec.eval(tm);
        advance(rec, ta, pa, tm, pm, depth + 1);
        advance(rec, tm, pm, tb, pb, depth + 1);
    }

    Vec2 center_;
    Vec2 prev_;
    double min_radius_;
    double theta0_ = 0.0;
    double accum_ = 0.0;
};

/// Detects sign changes of the line offset along the dense output. The
/// detector "arms" once the offset is clearly away from zero, so a start
/// exactly on the line does not count as a crossing.
class CrossingDetector {
  public:
    CrossingDetector(Line line, int direction, double arm_eps = 1e-11)
        : line_(line), direction_(direction), arm_eps_(arm_eps) {}

    /// First matching crossing inside this step, if any.
    std::optional<Crossing> process(const StepRecord& rec) {
        constexpr int kSamples = 8;
        double ta = rec.t0;
        double ga = line_.offset(rec.y0);
        for (int i = 1; i <= kSamples; ++i) {
            const double tb = rec.t0 + rec.h() * i / kSamples;
            const Vec2 pb = (i == kSamples) ? rec.y1 : rec.eval(tb);
            const double gb = line_.offset(pb);
            if (auto hit = scan(rec, ta, ga, tb, gb)) return hit;
            ta = tb;
            ga = gb;
        }
        return std::nullopt;
    }

  private:
    std::optional<Crossing> scan(const StepRecord& rec, double ta, double ga,
                                 double tb, double gb) {
        if (armed_ == 0) {
            if (std::abs(gb) > arm_eps_) armed_ = gb > 0 ? 1 : -1;
            return std::nullopt;
        }
        const int sb = gb > 0 ? 1 : (gb < 0 ? -1 : 0);
        if (sb == 0 || sb == armed_) return std::nullopt;
        // offset moved from sign `armed_` to `sb`; crossing direction is sb
        const int dir = sb;
        const int prev = armed_;
        armed_ = sb;
        if (direction_ != 0 && dir != direction_) return std::nullopt;
        // refine on the interpolant; ga may be ~0 if we armed mid-step
        double lo = ta, hi = tb;
        double glo = ga;
        if ((glo > 0 ? 1 : -1) != prev) glo = static_cast<double>(prev) * arm_eps_;
        for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
            const double tm = 0.5 * (lo + hi);
            const double gm = line_.offset(rec.eval(tm));
            if ((gm > 0 ? 1 : -1) == prev) {
                lo = tm;
                glo = gm;
            } else {
                hi = tm;
            }
        }
        (void)glo;
        const double tstar = 0.5 * (lo + hi);
        return Crossing{tstar, rec.eval(tstar)};
    }

    Line line_;
    int direction_;
    double arm_eps_;
    int armed_ = 0;
};

}  // namespace ltm::ode::detail
