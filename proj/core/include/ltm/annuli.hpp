#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ltm/models.hpp"
#include "ltm/ode.hpp"
#include "ltm/orbits.hpp"

namespace ltm::annuli {

/// Region between the level curves {H=e1} (inner) and {H=e2} (outer).
struct Annulus {
    models::SystemSpec sys;
    double e1 = 0.0;
    double e2 = 0.0;
};

Annulus make_annulus(const models::SystemSpec& sys, double e1, double e2);

enum class LinkKind { TwoCenters, OneCenterFour };

struct ChainPoint {
    std::string label;
    Vec2 p;
    double coord = 0.0;  // ordering coordinate along the section line
};

struct RectSide {
    int system = 0;      // 0: first annulus's system, 1: second
    double energy = 0.0; // level the side lies on
    std::vector<Vec2> arc;
};

/// Connected component of the intersection of two linked annuli, walked as
/// left side (inner first-system level), outer second-system arc, right side
/// (outer first-system level), inner second-system arc.
struct OrientedRectangle {
    std::array<Vec2, 4> corners;  // [e1&h1, e1&h2, e2&h2, e2&h1]
    std::array<RectSide, 4> sides;
    std::vector<Vec2> polygon;
    int region = 0;  // TwoCenters: 0 below / 1 above the line; bio: quadrant 0..3
};

struct LinkCertificate {
    LinkKind kind = LinkKind::TwoCenters;
    Annulus a, b;
    orbits::SectionLine line;
    std::array<ChainPoint, 8> chain;
    bool tangent = false;  // some tie comparison held only within slack
    std::vector<OrientedRectangle> rectangles;  // see intersection_rectangles
};

/// Verifies the interleaving chain of the eight boundary/line intersection
/// points. Throws NotLinkedError naming the first violated comparison, or
/// ValidationError on a mode mismatch (coincident centers for the game
/// variants, unsupported bio switch orientation).
LinkCertificate link_check(const Annulus& a, const Annulus& b);

/// Computes the 2 (TwoCenters) or 4 (OneCenterFour) intersection rectangles
/// of a certified link. Throws DegeneracyError for zero-width components.
std::vector<OrientedRectangle> intersection_rectangles(
    const LinkCertificate& cert, const ode::IntegratorConfig& cfg = {});

/// link_check + intersection_rectangles in one call.
LinkCertificate certify_link(const Annulus& a, const Annulus& b,
                             const ode::IntegratorConfig& cfg = {});

int region_count(LinkKind kind);

/// Region tag of a point: half-plane (0 down / 1 up) for TwoCenters,
/// quadrant (0..3, counterclockwise from the positive frame axis) for bio.
int region_of(const LinkCertificate& cert, Vec2 p);

/// Newton solve of H_a(p) = ea, H_b(p) = eb from a seed, with analytic
/// gradients; empty on divergence or domain exit.
std::optional<Vec2> level_intersection(const models::SystemSpec& sa,
                                       const models::SystemSpec& sb, double ea,
                                       double eb, Vec2 seed);

/// Both level-value sandwiches plus the region tag.
bool rect_contains(const LinkCertificate& cert, const OrientedRectangle& rect, Vec2 p,
                   double energy_tol);

}  // namespace ltm::annuli
