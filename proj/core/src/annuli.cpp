#include "ltm/annuli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "ltm/detail/observers.hpp"

namespace ltm::annuli {

using models::SystemSpec;
using models::Variant;

namespace {

constexpr double kTieSlack = 1e-9;
constexpr double kCornerTol = 1e-12;
constexpr double kMinCornerSeparation = 1e-6;
constexpr int kCurveSamples = 2048;
constexpr int kArcSamples = 64;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void check_switch_consistency(const Annulus& a, const Annulus& b) {
    if (a.sys.variant() != b.sys.variant())
        throw ValidationError("linked annuli must come from the same model variant");
    if (a.sys.variant() != Variant::Bio) return;

    const auto& p = a.sys.bio();
    const auto& q = b.sys.bio();
    if (p.alpha != q.alpha || p.beta != q.beta || p.gamma != q.gamma || p.delta != q.delta)
        throw ValidationError("bio linkage requires identical alpha/beta/gamma/delta");
    const bool r_switch = (p.r_x != q.r_x) || (p.r_y != q.r_y);
    const bool k_switch = (p.K_x != q.K_x) || (p.K_y != q.K_y);
    if (r_switch && k_switch)
        throw ValidationError("bio linkage supports switching r or K, not both");
    if (!r_switch && !k_switch)
        throw ValidationError("bio linkage needs a switched parameter (r or K)");
    if (r_switch && !(p.r_x > q.r_x && p.r_y < q.r_y))
        throw ValidationError(
            "bio r-switch linkage implemented for r_x(1) > r_x(2), r_y(1) < r_y(2) only");
    if (k_switch && !(p.K_x > q.K_x && p.K_y < q.K_y))
        throw ValidationError(
            "bio K-switch linkage implemented for K_x(I) > K_x(II), K_y(I) < K_y(II) only");
}

struct ChainSpec {
    std::array<std::string, 8> labels;
    std::array<bool, 7> tie_allowed;
};

ChainSpec chain_spec(LinkKind kind) {
    if (kind == LinkKind::TwoCenters) {
        return {{"S2-", "S1-", "V2-", "V1-", "S1+", "S2+", "V1+", "V2+"},
                {false, true, false, true, false, true, false}};
    }
    return {{"S(1)2-", "S(1)1-", "S(2)2-", "S(2)1-", "S(2)1+", "S(2)2+", "S(1)1+", "S(1)2+"},
            {false, true, false, false, false, true, false}};
}

}  // namespace

Annulus make_annulus(const SystemSpec& sys, double e1, double e2) {
    const double e0 = models::min_energy(sys);
    if (!(e0 < e1 && e1 < e2)) {
        std::ostringstream os;
        os << "annulus energies must satisfy e0 < e1 < e2; got e0=" << e0
           << ", e1=" << e1 << ", e2=" << e2;
        throw ValidationError(os.str());
    }
    return Annulus{sys, e1, e2};
}

int region_count(LinkKind kind) { return kind == LinkKind::TwoCenters ? 2 : 4; }

int region_of(const LinkCertificate& cert, Vec2 p) {
    if (cert.kind == LinkKind::TwoCenters)
        return cert.line.line.offset(p) >= 0.0 ? 1 : 0;
    const Vec2 l = cert.line.frame_at(cert.line.line.base).to_local(p);
    if (l.x > 0.0) return l.y > 0.0 ? 0 : 3;
    return l.y > 0.0 ? 1 : 2;
}

bool rect_contains(const LinkCertificate& cert, const OrientedRectangle& rect, Vec2 p,
                   double energy_tol) {
    if (!models::inside_domain(cert.a.sys, p, 1e-12) ||
        !models::inside_domain(cert.b.sys, p, 1e-12))
        return false;
    const double ha = models::hamiltonian(cert.a.sys, p);
    if (ha < cert.a.e1 - energy_tol || ha > cert.a.e2 + energy_tol) return false;
    const double hb = models::hamiltonian(cert.b.sys, p);
    if (hb < cert.b.e1 - energy_tol || hb > cert.b.e2 + energy_tol) return false;
    return region_of(cert, p) == rect.region;
}

LinkCertificate link_check(const Annulus& a, const Annulus& b) {
    check_switch_consistency(a, b);

    LinkCertificate cert;
    cert.a = a;
    cert.b = b;
    cert.kind = a.sys.variant() == Variant::Bio ? LinkKind::OneCenterFour
                                                : LinkKind::TwoCenters;
    cert.line = orbits::section_line(a.sys, b.sys);

    const auto [a1m, a1p] = orbits::section_points(a.sys, a.e1, cert.line);
    const auto [a2m, a2p] = orbits::section_points(a.sys, a.e2, cert.line);
    const auto [b1m, b1p] = orbits::section_points(b.sys, b.e1, cert.line);
    const auto [b2m, b2p] = orbits::section_points(b.sys, b.e2, cert.line);

    const ChainSpec spec = chain_spec(cert.kind);
    const std::array<Vec2, 8> pts =
        cert.kind == LinkKind::TwoCenters
            ? std::array<Vec2, 8>{a2m, a1m, b2m, b1m, a1p, a2p, b1p, b2p}
            : std::array<Vec2, 8>{a2m, a1m, b2m, b1m, b1p, b2p, a1p, a2p};
    for (int i = 0; i < 8; ++i)
        cert.chain[i] = ChainPoint{spec.labels[i], pts[i], cert.line.order_coord(pts[i])};

    for (int i = 0; i < 7; ++i) {
        const double lhs = cert.chain[i].coord;
        const double rhs = cert.chain[i + 1].coord;
        const double slack = spec.tie_allowed[i] ? kTieSlack : 0.0;
        if (!(lhs <= rhs + slack)) {
            std::ostringstream os;
            os << "annuli not linked: " << cert.chain[i].label
               << (spec.tie_allowed[i] ? " ⭴ " : " ◁ ") << cert.chain[i + 1].label
               << " violated (" << fmt(lhs) << " vs " << fmt(rhs) << ")";
            throw NotLinkedError(os.str());
        }
        if (spec.tie_allowed[i] && rhs - lhs <= kTieSlack) cert.tangent = true;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Intersection rectangles.
// ---------------------------------------------------------------------------

namespace {

struct Box {
    double xlo, xhi, ylo, yhi;
};

Box seg_box(Vec2 a, Vec2 b) {
    return {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
}

bool boxes_overlap(const Box& a, const Box& b) {
    return a.xlo <= b.xhi && b.xlo <= a.xhi && a.ylo <= b.yhi && b.ylo <= a.yhi;
}

std::optional<Vec2> segment_intersection(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const Vec2 r = p2 - p1;
    const Vec2 s = q2 - q1;
    const double den = cross(r, s);
    if (den == 0.0) return std::nullopt;
    const double t = cross(q1 - p1, s) / den;
    const double u = cross(q1 - p1, r) / den;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return p1 + t * r;
}

}  // namespace

std::optional<Vec2> level_intersection(const SystemSpec& sa, const SystemSpec& sb,
                                       double ea, double eb, Vec2 seed) {
    Vec2 p = seed;
    const double scale = std::max({1.0, std::abs(ea), std::abs(eb)});
    for (int it = 0; it < 60; ++it) {
        if (!models::inside_domain(sa, p, 1e-12) || !models::inside_domain(sb, p, 1e-12))
            return std::nullopt;
        const double fa = models::hamiltonian(sa, p) - ea;
        const double fb = models::hamiltonian(sb, p) - eb;
        if (std::abs(fa) <= kCornerTol * scale && std::abs(fb) <= kCornerTol * scale) return p;
        const Vec2 ga = models::hamiltonian_gradient(sa, p);
        const Vec2 gb = models::hamiltonian_gradient(sb, p);
        const double det = ga.x * gb.y - ga.y * gb.x;
        if (det == 0.0) return std::nullopt;
        Vec2 step{(fa * gb.y - fb * ga.y) / det, (ga.x * fb - gb.x * fa) / det};
        // damp steps that would leave the common domain
        double lam = 1.0;
        for (int k = 0; k < 50; ++k) {
            const Vec2 cand = p - lam * step;
            if (models::inside_domain(sa, cand, 1e-10) &&
                models::inside_domain(sb, cand, 1e-10)) {
                p = cand;
                break;
            }
            lam *= 0.5;
        }
    }
    return std::nullopt;
}

namespace {

/// Arc of the level curve of `sys` from corner `from` to corner `to`,
/// along which H_other runs from its value at `from` to `h_target`.
std::vector<Vec2> trace_arc(const SystemSpec& sys, const SystemSpec& other, Vec2 from,
                            Vec2 to, double h_target, double t_cap,
                            const ode::IntegratorConfig& cfg0) {
    const ode::IntegratorConfig cfg = ode::with_auto_step(sys, cfg0);
    const double g0 = models::hamiltonian(other, from) - h_target;
    const Vec2 f0 = models::vector_field(sys, from);
    const double slope = dot(models::hamiltonian_gradient(other, from), f0);
    // move so that H_other heads toward h_target
    double sign = (g0 < 0.0) == (slope > 0.0) ? 1.0 : -1.0;

    for (int attempt = 0; attempt < 2; ++attempt, sign = -sign) {
        const auto rhs = [&](double, Vec2 y) { return sign * models::vector_field(sys, y); };
        double t_hit = -1.0;
        try {
            ode::Dopri5<decltype(rhs)> stepper(rhs, cfg, 0.0, from);
            double g_prev = g0;
            while (stepper.time() < t_cap && t_hit < 0.0) {
                const ode::StepRecord& rec = stepper.step_to(t_cap);
                constexpr int kScan = 8;
                double ta = rec.t0;
                double ga = g_prev;
                for (int i = 1; i <= kScan; ++i) {
                    const double tb = rec.t0 + rec.h() * i / kScan;
                    const Vec2 pb = (i == kScan) ? rec.y1 : rec.eval(tb);
                    const double gb = models::hamiltonian(other, pb) - h_target;
                    if ((ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0)) {
                        double lo = ta, hi = tb;
                        for (int it = 0; it < 70 && hi - lo > 1e-13; ++it) {
                            const double tm = 0.5 * (lo + hi);
                            const double gm =
                                models::hamiltonian(other, rec.eval(tm)) - h_target;
                            if ((gm < 0.0) == (ga < 0.0)) lo = tm; else hi = tm;
                        }
                        t_hit = 0.5 * (lo + hi);
                        break;
                    }
                    ta = tb;
                    ga = gb;
                }
                g_prev = models::hamiltonian(other, rec.y1) - h_target;
            }
        } catch (const NumericError&) {
            continue;
        }
        if (t_hit <= 0.0) continue;

        std::vector<double> times(kArcSamples);
        for (int i = 0; i < kArcSamples; ++i)
            times[i] = t_hit * i / (kArcSamples - 1);
        times.back() = t_hit;
        std::vector<Vec2> arc(times.size());
        size_t next = 0;
        while (next < times.size() && times[next] == 0.0) arc[next++] = from;
        const Vec2 last = ode::integrate(rhs, cfg, 0.0, from, t_hit,
                                         [&](const ode::StepRecord& rec) {
            while (next < times.size() && times[next] <= rec.t1) {
                arc[next] = (times[next] >= rec.t1) ? rec.y1 : rec.eval(times[next]);
                ++next;
            }
        });
        while (next < times.size()) arc[next++] = last;
        if (dist(arc.back(), to) < 1e-6) {
            arc.back() = to;
            return arc;
        }
    }
    throw NumericError("failed to trace a rectangle boundary arc between corners");
}

}  // namespace

std::vector<OrientedRectangle> intersection_rectangles(const LinkCertificate& cert,
                                                       const ode::IntegratorConfig& cfg) {
    const SystemSpec& sa = cert.a.sys;
    const SystemSpec& sb = cert.b.sys;
    const std::array<double, 2> ea = {cert.a.e1, cert.a.e2};
    const std::array<double, 2> eb = {cert.b.e1, cert.b.e2};

    std::array<std::vector<Vec2>, 2> curve_a, curve_b;
    std::array<double, 2> tau_a, tau_b;
    for (int i = 0; i < 2; ++i) {
        tau_a[i] = orbits::period(sa, ea[i], cfg);
        tau_b[i] = orbits::period(sb, eb[i], cfg);
        curve_a[i] = orbits::orbit_samples(sa, ea[i], kCurveSamples, cfg);
        curve_b[i] = orbits::orbit_samples(sb, eb[i], kCurveSamples, cfg);
    }

    const int regions = region_count(cert.kind);
    // corners[region][i][j]: intersection of level a.e_i with b.e_j
    std::vector<std::array<std::array<std::optional<Vec2>, 2>, 2>> corners(regions);

    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            std::vector<Vec2> found;
            const auto& ca = curve_a[i];
            const auto& cb = curve_b[j];
            for (size_t s = 0; s + 1 < ca.size(); ++s) {
                const Box box_a = seg_box(ca[s], ca[s + 1]);
                for (size_t t = 0; t + 1 < cb.size(); ++t) {
                    const Box box_b = seg_box(cb[t], cb[t + 1]);
                    if (!boxes_overlap(box_a, box_b)) continue;
                    const auto seed = segment_intersection(ca[s], ca[s + 1], cb[t], cb[t + 1]);
                    if (!seed) continue;
                    const auto corner = level_intersection(sa, sb, ea[i], eb[j], *seed);
                    if (!corner) continue;
                    const bool dup = std::any_of(found.begin(), found.end(), [&](Vec2 q) {
                        return dist(q, *corner) < 1e-7;
                    });
                    if (!dup) found.push_back(*corner);
                }
            }
            if (static_cast<int>(found.size()) != regions) {
                std::ostringstream os;
                os << "expected " << regions << " crossings of levels (" << ea[i] << ", "
                   << eb[j] << "), found " << found.size();
                throw DegeneracyError(os.str());
            }
            for (const Vec2& p : found) {
                const int r = region_of(cert, p);
                if (corners[r][i][j]) {
                    std::ostringstream os;
                    os << "two crossings of levels (" << ea[i] << ", " << eb[j]
                       << ") fell in the same region; components are not rectangles";
                    throw DegeneracyError(os.str());
                }
                corners[r][i][j] = p;
            }
        }
    }

    std::vector<OrientedRectangle> rects;
    for (int r = 0; r < regions; ++r) {
        OrientedRectangle rect;
        rect.region = r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                if (!corners[r][i][j]) throw DegeneracyError("missing rectangle corner");
        const Vec2 c11 = *corners[r][0][0];
        const Vec2 c12 = *corners[r][0][1];
        const Vec2 c22 = *corners[r][1][1];
        const Vec2 c21 = *corners[r][1][0];
        rect.corners = {c11, c12, c22, c21};

        double min_sep = 1e300;
        const std::array<Vec2, 4> cs = {c11, c12, c22, c21};
        for (int u = 0; u < 4; ++u)
            for (int v = u + 1; v < 4; ++v) min_sep = std::min(min_sep, dist(cs[u], cs[v]));
        if (min_sep < kMinCornerSeparation) {
            std::ostringstream os;
            os << "degenerate intersection component (corner separation " << min_sep
               << "); levels a:(" << ea[0] << "," << ea[1] << ") b:(" << eb[0] << ","
               << eb[1] << ") are nearly tangent";
            throw DegeneracyError(os.str());
        }

        rect.sides[0] = {0, ea[0], trace_arc(sa, sb, c11, c12, eb[1], 1.05 * tau_a[0], cfg)};
        rect.sides[1] = {1, eb[1], trace_arc(sb, sa, c12, c22, ea[1], 1.05 * tau_b[1], cfg)};
        rect.sides[2] = {0, ea[1], trace_arc(sa, sb, c22, c21, eb[0], 1.05 * tau_a[1], cfg)};
        rect.sides[3] = {1, eb[0], trace_arc(sb, sa, c21, c11, ea[0], 1.05 * tau_b[0], cfg)};

        for (int s = 0; s < 4; ++s) {
            const auto& arc = rect.sides[s].arc;
            rect.polygon.insert(rect.polygon.end(), arc.begin() + (s == 0 ? 0 : 1), arc.end());
        }
        rects.push_back(std::move(rect));
    }
    return rects;
}

LinkCertificate certify_link(const Annulus& a, const Annulus& b,
                             const ode::IntegratorConfig& cfg) {
    LinkCertificate cert = link_check(a, b);
    cert.rectangles = intersection_rectangles(cert, cfg);
    return cert;
}

}  // namespace ltm::annuli
