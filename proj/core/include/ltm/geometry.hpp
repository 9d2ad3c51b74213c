#pragma once

#include <cmath>

namespace ltm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
inline Vec2 operator-(Vec2 v) { return {-v.x, -v.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 normalized(Vec2 v) { return v / norm(v); }
inline Vec2 rot90(Vec2 v) { return {-v.y, v.x}; }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

/// Oriented line: unit direction, signed offset = perpendicular distance.
struct Line {
    Vec2 base;
    Vec2 dir;  // unit

    double offset(Vec2 p) const { return cross(dir, p - base); }
    double coord(Vec2 p) const { return dot(dir, p - base); }
    Vec2 at(double s) const { return base + s * dir; }
};

/// Rototranslated frame: origin at a center, x-axis along `u` (unit),
/// y-axis = u rotated by +90 degrees. Proper rotation, so angles measured
/// in the frame are counterclockwise angles of the original plane.
struct Frame {
    Vec2 origin;
    Vec2 u;

    Vec2 to_local(Vec2 p) const {
        Vec2 d = p - origin;
        return {dot(d, u), cross(u, d)};
    }
    /// Angle in (-pi, pi].
    double angle(Vec2 p) const {
        Vec2 l = to_local(p);
        return std::atan2(l.y, l.x);
    }
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

/// Shift `theta` by a multiple of 2*pi so it lands nearest to `anchor`.
inline double unwrap_near(double theta, double anchor) {
    return theta + kTwoPi * std::round((anchor - theta) / kTwoPi);
}

}  // namespace ltm
