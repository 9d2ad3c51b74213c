#include "ltm/twist.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <sstream>

#include "ltm/detail/observers.hpp"
#include "ltm/parallel.hpp"

namespace ltm::twist {

using annuli::LinkCertificate;
using annuli::LinkKind;
using annuli::OrientedRectangle;
using models::Rotation;
using models::SystemSpec;
using models::Variant;

namespace {

constexpr double kSideEnergyTol = 1e-8;   // endpoint images must hit the side levels this well
constexpr double kLambdaFloor = 1e-13;
constexpr double kMinSpanRefine = kPi / 8;

bool close(double a, double b, double tol = 1e-9) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

SwitchSchedule make_schedule(const SystemSpec& sys1, const SystemSpec& sys2, double T1,
                             double T2) {
    if (!(T1 > 0.0) || !(T2 > 0.0))
        throw ValidationError("switching durations must be positive");
    if (sys1.variant() != sys2.variant())
        throw ValidationError("both phases must use the same model variant");

    switch (sys1.variant()) {
        case Variant::NegMed: {
            const auto& a = sys1.neg();
            const auto& b = sys2.neg();
            if (!close(a.zeta, b.zeta))
                throw ValidationError("NegMed switch must keep zeta fixed");
            if (!close(a.kappa - a.theta, b.kappa - b.theta))
                throw ValidationError(
                    "NegMed switch must keep kappa - theta fixed (q_ND switch)");
            break;
        }
        case Variant::PosMed: {
            const auto& a = sys1.pos();
            const auto& b = sys2.pos();
            if (!close(a.lambda, b.lambda) || !close(a.mu, b.mu) || !close(a.nu, b.nu))
                throw ValidationError("PosMed switch must change p only");
            break;
        }
        case Variant::Bio: {
            const auto& a = sys1.bio();
            const auto& b = sys2.bio();
            if (a.alpha != b.alpha || a.beta != b.beta || a.gamma != b.gamma ||
                a.delta != b.delta)
                throw ValidationError("bio switch must keep alpha/beta/gamma/delta fixed");
            const bool r_switch = (a.r_x != b.r_x) || (a.r_y != b.r_y);
            const bool k_switch = (a.K_x != b.K_x) || (a.K_y != b.K_y);
            if (r_switch && k_switch)
                throw ValidationError("bio switch must change r or K, not both");
            if (!r_switch && !k_switch)
                throw ValidationError("bio switch must change r or K");
            break;
        }
    }
    return SwitchSchedule{sys1, sys2, T1, T2};
}

ThresholdReport thresholds(double tau1a, double tau1b, double tau2a, double tau2b,
                           Variant variant) {
    if (!(tau1b > tau1a) || !(tau2b > tau2a))
        throw ValidationError(
            "threshold formula needs tau(outer) > tau(inner) in each pair");
    ThresholdReport r;
    r.c1 = variant == Variant::Bio ? 9.0 : 11.0;
    r.c2 = variant == Variant::Bio ? 7.0 : 9.0;
    r.tau1a = tau1a;
    r.tau1b = tau1b;
    r.tau2a = tau2a;
    r.tau2b = tau2b;
    r.T1_min = r.c1 * tau1a * tau1b / (2.0 * (tau1b - tau1a));
    r.T2_min = r.c2 * tau2a * tau2b / (2.0 * (tau2b - tau2a));
    return r;
}

// ---------------------------------------------------------------------------
// Phase legs: one switching phase as an integrable (possibly time-varying)
// field with angle bookkeeping.
// ---------------------------------------------------------------------------

namespace {

double waveform(PerturbShape shape, double phase01) {
    if (shape == PerturbShape::SquareWave) {
        const double f = phase01 - std::floor(phase01);
        return f < 0.5 ? 1.0 : -1.0;
    }
    return std::sin(kTwoPi * phase01);
}

struct Leg {
    SystemSpec sys;
    double T = 0.0;
    double t0_global = 0.0;  // phase start within the switching period
    Vec2 rot_center;
    double rot_sign = 1.0;  // +1 counterclockwise, -1 clockwise
    // coefficient jitter (amplitude 0 = autonomous phase)
    double amp = 0.0;
    PerturbShape shape = PerturbShape::SquareWave;
    int cycles = 8;
    double cycle_T = 1.0;

    Vec2 operator()(double t_local, Vec2 y) const {
        if (amp == 0.0) return models::vector_field(sys, y);
        const double w =
            amp * waveform(shape, (t0_global + t_local) * cycles / cycle_T);
        switch (sys.variant()) {
            case Variant::NegMed: {
                models::ParamsNeg c = sys.neg();
                c.eta += w;
                c.theta -= w;
                c.kappa += w;
                return models::rhs(c, y);
            }
            case Variant::PosMed: {
                models::ParamsPos c = sys.pos();
                c.p += w;
                return models::rhs(c, y);
            }
            case Variant::Bio: {
                models::ParamsBio c = sys.bio();
                if (jitter_K) {
                    c.K_x += w;
                    c.K_y -= w;
                } else {
                    c.r_x += w;
                    c.r_y -= w;
                }
                return models::rhs(c, y);
            }
        }
        return models::vector_field(sys, y);
    }

    bool jitter_K = false;
};

/// Worst-case regime check for jittered coefficients.
void validate_leg_regime(const Leg& leg) {
    if (leg.amp == 0.0) return;
    const double a = std::abs(leg.amp);
    switch (leg.sys.variant()) {
        case Variant::NegMed: {
            auto c = leg.sys.neg();
            models::ParamsNeg worst{c.zeta, c.eta - a, c.theta + a, c.kappa - a};
            try {
                models::validate(worst);
            } catch (const ValidationError& e) {
                throw ValidationError(std::string("perturbation destroys the center regime: ") +
                                      e.what());
            }
            break;
        }
        case Variant::PosMed: {
            auto c = leg.sys.pos();
            for (double p : {c.p - a, c.p + a}) {
                models::ParamsPos worst{p, c.lambda, c.mu, c.nu};
                try {
                    models::validate(worst);
                } catch (const ValidationError& e) {
                    throw ValidationError(
                        std::string("perturbation destroys the center regime: ") + e.what());
                }
            }
            break;
        }
        case Variant::Bio: {
            auto c = leg.sys.bio();
            models::ParamsBio worst = c;
            if (leg.jitter_K) {
                worst.K_x -= a;
                worst.K_y -= a;
            } else {
                worst.r_x -= a;
                worst.r_y -= a;
            }
            try {
                models::validate(worst);
            } catch (const ValidationError& e) {
                throw ValidationError(std::string("perturbation destroys the center regime: ") +
                                      e.what());
            }
            break;
        }
    }
}

std::array<Leg, 2> build_legs(const SwitchSchedule& sched, const Perturbation& pert) {
    const double sign =
        models::rotation_direction(sched.sys1) == Rotation::CounterClockwise ? 1.0 : -1.0;
    const bool jitter_k = sched.sys1.variant() == Variant::Bio &&
                          (sched.sys1.bio().K_x != sched.sys2.bio().K_x ||
                           sched.sys1.bio().K_y != sched.sys2.bio().K_y);
    std::array<Leg, 2> legs;
    legs[0] = Leg{sched.sys1, sched.T1, 0.0,       models::center(sched.sys1), sign,
                  pert.amplitude, pert.shape, pert.cycles, std::max(sched.period(), 1e-300)};
    legs[1] = Leg{sched.sys2, sched.T2, sched.T1,  models::center(sched.sys2), sign,
                  pert.amplitude, pert.shape, pert.cycles, std::max(sched.period(), 1e-300)};
    legs[0].jitter_K = jitter_k;
    legs[1].jitter_K = jitter_k;
    validate_leg_regime(legs[0]);
    validate_leg_regime(legs[1]);
    return legs;
}

ode::IntegratorConfig leg_config(const Leg& leg, ode::IntegratorConfig cfg) {
    return ode::with_auto_step(leg.sys, cfg);
}

Vec2 leg_endpoint(const Leg& leg, Vec2 x0, const ode::IntegratorConfig& cfg0) {
    if (leg.T == 0.0) return x0;
    const auto cfg = leg_config(leg, cfg0);
    return ode::integrate(leg, cfg, 0.0, x0, leg.T, [](const ode::StepRecord&) {});
}

struct LegAngleResult {
    Vec2 y;
    double theta0 = 0.0;  // raw initial angle in (-pi, pi]
    double dtheta = 0.0;  // unwrapped increment over the leg
};

LegAngleResult leg_flow_angle(const Leg& leg, Vec2 x0, const ode::IntegratorConfig& cfg0) {
    LegAngleResult res;
    ode::detail::AngleTracker tracker(leg.rot_center, x0);
    res.theta0 = tracker.initial_angle();
    if (leg.T == 0.0) {
        res.y = x0;
        return res;
    }
    const auto cfg = leg_config(leg, cfg0);
    res.y = ode::integrate(leg, cfg, 0.0, x0, leg.T,
                           [&](const ode::StepRecord& rec) { tracker.process(rec); });
    res.dtheta = tracker.delta();
    return res;
}

Vec2 full_period_map(const std::array<Leg, 2>& legs, Vec2 x,
                     const ode::IntegratorConfig& cfg) {
    return leg_endpoint(legs[1], leg_endpoint(legs[0], x, cfg), cfg);
}

// ---------------------------------------------------------------------------
// Paths across a rectangle in its curvilinear coordinates.
// ---------------------------------------------------------------------------

/// Path from the left to the right side of a rectangle: the varied system's
/// energy sweeps its annulus range while the other stays at mid-level.
class RectPath {
  public:
    RectPath(const LinkCertificate& cert, const OrientedRectangle& rect, int vary_system)
        : cert_(&cert), vary_(vary_system) {
        Vec2 seed = 0.25 * (rect.corners[0] + rect.corners[1] + rect.corners[2] +
                            rect.corners[3]);
        coarse_.resize(kCoarse);
        const int mid = kCoarse / 2;
        coarse_[mid] = solve(lam_of(mid), seed);
        for (int i = mid + 1; i < kCoarse; ++i) coarse_[i] = solve(lam_of(i), coarse_[i - 1]);
        for (int i = mid - 1; i >= 0; --i) coarse_[i] = solve(lam_of(i), coarse_[i + 1]);
    }

    Vec2 at(double lam) const {
        const int i = static_cast<int>(std::lround(lam * (kCoarse - 1)));
        const int j = std::clamp(i, 0, kCoarse - 1);
        return solve(lam, coarse_[j]);
    }

  private:
    static constexpr int kCoarse = 129;

    static double lam_of(int i) { return static_cast<double>(i) / (kCoarse - 1); }

    Vec2 solve(double lam, Vec2 seed) const {
        const double ea = vary_ == 0
                              ? cert_->a.e1 + lam * (cert_->a.e2 - cert_->a.e1)
                              : 0.5 * (cert_->a.e1 + cert_->a.e2);
        const double eb = vary_ == 1
                              ? cert_->b.e1 + lam * (cert_->b.e2 - cert_->b.e1)
                              : 0.5 * (cert_->b.e1 + cert_->b.e2);
        const auto p = annuli::level_intersection(cert_->a.sys, cert_->b.sys, ea, eb, seed);
        if (!p)
            throw NumericError("path construction failed: level intersection did not converge");
        return *p;
    }

    const LinkCertificate* cert_;
    int vary_;
    std::vector<Vec2> coarse_;
};

// ---------------------------------------------------------------------------
// Crossing scan.
// ---------------------------------------------------------------------------

struct ScanSample {
    double lam = 0.0;
    Vec2 y;
    double phi = 0.0;
    double h_side = 0.0;  // target's side-system energy at the image
    bool inside = false;
};

struct ScanContext {
    const LinkCertificate* cert;
    const Leg* leg;
    const RectPath* path;
    const OrientedRectangle* target;
    const SystemSpec* side_sys;  // whose levels form the target's designated sides
    double side_lo, side_hi;     // those two levels
    double window_mid;           // initial-angle branch anchor for the source region
    double mem_tol;
    const ode::IntegratorConfig* cfg;
    // pre-composition applied before the leg (identity in plain verification)
    const std::array<Leg, 2>* pre_legs = nullptr;
    int pre_periods = 0;

    ScanSample eval(double lam) const {
        ScanSample s;
        s.lam = lam;
        Vec2 x = path->at(lam);
        for (int k = 0; k < pre_periods; ++k) x = full_period_map(*pre_legs, x, *cfg);
        const LegAngleResult r = leg_flow_angle(*leg, x, *cfg);
        s.y = r.y;
        const double theta0n = unwrap_near(r.theta0, window_mid);
        s.phi = leg->rot_sign * (theta0n + r.dtheta);
        s.h_side = models::inside_domain(*side_sys, r.y, 1e-12)
                       ? models::hamiltonian(*side_sys, r.y)
                       : 1e300;
        s.inside = annuli::rect_contains(*cert, *target, r.y, mem_tol);
        return s;
    }
};

/// Angular extent of the target rectangle about the leg's rotation center,
/// in the signed-angle convention.
std::pair<double, double> target_window(const ScanContext& ctx) {
    const Frame frame{ctx.leg->rot_center, ctx.cert->line.line.dir};
    const std::vector<Vec2>& poly =
        ctx.target->polygon.empty()
            ? std::vector<Vec2>(ctx.target->corners.begin(), ctx.target->corners.end())
            : ctx.target->polygon;
    double lo = 0.0, hi = 0.0, prev = 0.0;
    bool first = true;
    for (const Vec2& p : poly) {
        double th = frame.angle(p);
        if (first) {
            prev = lo = hi = th;
            first = false;
            continue;
        }
        th = unwrap_near(th, prev);
        prev = th;
        lo = std::min(lo, th);
        hi = std::max(hi, th);
    }
    if (ctx.leg->rot_sign < 0.0) {
        const double nlo = -hi, nhi = -lo;
        lo = nlo;
        hi = nhi;
    }
    return {lo, hi};
}

bool near_window(double phi_a, double phi_b, const std::pair<double, double>& win) {
    const double margin = std::max(0.25 * (win.second - win.first), 0.05);
    const double lo = std::min(phi_a, phi_b);
    const double hi = std::max(phi_a, phi_b);
    const double mid = 0.5 * (lo + hi);
    const double wmid = 0.5 * (win.first + win.second);
    const double k0 = std::round((mid - wmid) / kTwoPi);
    for (double k = k0 - 1; k <= k0 + 1; ++k) {
        const double wlo = win.first - margin + kTwoPi * k;
        const double whi = win.second + margin + kTwoPi * k;
        if (lo <= whi && wlo <= hi) return true;
    }
    return false;
}

std::vector<ScanSample> scan_samples(const ScanContext& ctx, double lam_a, double lam_b,
                                     int n_base, const std::pair<double, double>& window) {
    std::vector<ScanSample> samples(n_base);
    parallel_for(n_base, [&](size_t i) {
        const double lam = lam_a + (lam_b - lam_a) * static_cast<double>(i) / (n_base - 1);
        samples[i] = ctx.eval(lam);
    });

    const double win_width = window.second - window.first;
    const double fine_cap = std::max(win_width / 10.0, 1e-4);
    const size_t hard_cap = 400000;

    for (int round = 0; round < 64; ++round) {
        std::vector<double> mids;
        for (size_t i = 0; i + 1 < samples.size(); ++i) {
            const ScanSample& a = samples[i];
            const ScanSample& b = samples[i + 1];
            const double dl = b.lam - a.lam;
            if (dl <= kLambdaFloor) continue;
            const double dphi = std::abs(b.phi - a.phi);
            bool split = dphi > kMinSpanRefine;
            if (!split && a.inside != b.inside && dl > 1e-9) split = true;
            if (!split && dphi > fine_cap && near_window(a.phi, b.phi, window)) split = true;
            if (split) mids.push_back(0.5 * (a.lam + b.lam));
        }
        if (mids.empty() || samples.size() + mids.size() > hard_cap) break;
        std::vector<ScanSample> extra(mids.size());
        parallel_for(mids.size(), [&](size_t i) { extra[i] = ctx.eval(mids[i]); });
        samples.insert(samples.end(), extra.begin(), extra.end());
        std::sort(samples.begin(), samples.end(),
                  [](const ScanSample& x, const ScanSample& y) { return x.lam < y.lam; });
    }
    return samples;
}

/// Root of h_side(eval(lam)) = level between an outside and an inside sample.
/// Returns the refined lambda, or nullopt if the energy tolerance was not
/// reached before the lambda floor.
std::optional<double> refine_side(const ScanContext& ctx, double lam_out, double h_out,
                                  double lam_in, double h_in, double level) {
    double lo = lam_out, glo = h_out - level;
    double hi = lam_in, ghi = h_in - level;
    if (glo == 0.0) return lam_out;
    if (ghi == 0.0) return lam_in;
    if ((glo > 0.0) == (ghi > 0.0)) return std::nullopt;
    double best_lam = lam_in, best_res = std::abs(ghi);
    for (int it = 0; it < 90; ++it) {
        double mid;
        // regula falsi with occasional bisection for safety
        if (it % 3 == 2 && std::isfinite(glo) && std::isfinite(ghi) && glo != ghi) {
            mid = lo + (hi - lo) * (-glo) / (ghi - glo);
            const double w = std::abs(hi - lo);
            mid = std::clamp(mid, std::min(lo, hi) + 1e-3 * w, std::max(lo, hi) - 1e-3 * w);
        } else {
            mid = 0.5 * (lo + hi);
        }
        const ScanSample s = ctx.eval(mid);
        const double g = s.h_side - level;
        if (std::abs(g) < best_res) {
            best_res = std::abs(g);
            best_lam = mid;
        }
        if (best_res <= kSideEnergyTol) return best_lam;
        if ((g > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = g;
        } else {
            hi = mid;
            ghi = g;
        }
        if (std::abs(hi - lo) <= kLambdaFloor) break;
    }
    return best_res <= 1e-6 ? std::optional<double>(best_lam) : std::nullopt;
}

PhaseStretch scan_phase(const ScanContext& ctx, int source_rect, int target_rect,
                        double span_required, int required_crossings, int n_base) {
    const auto window = target_window(ctx);
    std::vector<ScanSample> samples = scan_samples(ctx, 0.0, 1.0, n_base, window);

    PhaseStretch out;
    out.source_rect = source_rect;
    out.target_rect = target_rect;
    out.span_required = span_required;
    out.required_crossings = required_crossings;
    out.span = samples.front().phi - samples.back().phi;

    out.trace.reserve(samples.size());
    for (const ScanSample& s : samples)
        out.trace.push_back(TraceSample{s.lam, s.phi, s.inside});

    // maximal runs of inside samples, with side-resolved boundaries
    const double band_mid = 0.5 * (ctx.side_lo + ctx.side_hi);
    size_t i = 0;
    while (i < samples.size()) {
        if (!samples[i].inside) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j + 1 < samples.size() && samples[j + 1].inside) ++j;
        if (i > 0 && j + 1 < samples.size()) {
            CrossingInterval ci;
            // anchor the root bracket on a sample clearly interior to the
            // band, so membership slack at the boundary cannot spoil it
            const auto classify = [&](const ScanSample& outside, size_t run_from,
                                      size_t run_to, int step, int& side,
                                      double& lam_ref) {
                double level;
                if (outside.h_side < ctx.side_lo + kSideEnergyTol) {
                    side = 0;
                    level = ctx.side_lo;
                } else if (outside.h_side > ctx.side_hi - kSideEnergyTol) {
                    side = 1;
                    level = ctx.side_hi;
                } else {
                    side = -1;  // left through a non-designated side
                    lam_ref = 0.5 * (outside.lam + samples[run_from].lam);
                    return;
                }
                const ScanSample* anchor = &samples[run_to];
                for (size_t k = run_from;; k += step) {
                    const double h = samples[k].h_side;
                    const bool clear = side == 0 ? h > ctx.side_lo + 10 * kSideEnergyTol
                                                 : h < ctx.side_hi - 10 * kSideEnergyTol;
                    if (clear) {
                        anchor = &samples[k];
                        break;
                    }
                    if (k == run_to) break;
                }
                const auto lam = refine_side(ctx, outside.lam, outside.h_side,
                                             anchor->lam, anchor->h_side, level);
                if (!lam) {
                    side = -1;
                    lam_ref = 0.5 * (outside.lam + samples[run_from].lam);
                    return;
                }
                lam_ref = *lam;
            };
            classify(samples[i - 1], i, j, +1, ci.side_lo, ci.lam_lo);
            classify(samples[j + 1], j, i, -1, ci.side_hi, ci.lam_hi);
            (void)band_mid;
            if (ci.complete()) out.crossings.push_back(ci);
        }
        i = j + 1;
    }
    return out;
}

struct StretchSetup {
    std::array<Leg, 2> legs;
    RectPath forward_path, backward_path;
    const OrientedRectangle *rect_from, *rect_to;

    StretchSetup(const SwitchSchedule& sched, const LinkCertificate& cert, int from,
                 int to, const Perturbation& pert)
        : legs(build_legs(sched, pert)),
          forward_path(cert, rect(cert, from), 0),
          backward_path(cert, rect(cert, to), 1),
          rect_from(&rect(cert, from)),
          rect_to(&rect(cert, to)) {}

    static const OrientedRectangle& rect(const LinkCertificate& cert, int idx) {
        if (cert.rectangles.empty())
            throw ValidationError(
                "link certificate carries no rectangles; run intersection_rectangles first");
        if (idx < 0 || idx >= static_cast<int>(cert.rectangles.size()))
            throw ValidationError("rectangle index out of range");
        return cert.rectangles[idx];
    }
};

double region_window_mid(const LinkCertificate& cert, int region) {
    if (cert.kind == LinkKind::TwoCenters) return region == 1 ? kPi / 2 : -kPi / 2;
    static constexpr double mids[4] = {kPi / 4, 3 * kPi / 4, -3 * kPi / 4, -kPi / 4};
    return mids[region & 3];
}

StretchCertificate verify_impl(const SwitchSchedule& sched, const LinkCertificate& cert,
                               int rect_from, int rect_to, int n_path,
                               const Perturbation& pert, const ode::IntegratorConfig& cfg) {
    if (n_path < 256) throw ValidationError("verify_stretch needs n_path >= 256");
    StretchSetup setup(sched, cert, rect_from, rect_to, pert);

    const double mem_tol =
        1e-9 * std::max({1.0, std::abs(cert.a.e2), std::abs(cert.b.e2)});

    StretchCertificate out;
    out.T1 = sched.T1;
    out.T2 = sched.T2;
    out.n_path = n_path;

    {
        ScanContext ctx;
        ctx.cert = &cert;
        ctx.leg = &setup.legs[0];
        ctx.path = &setup.forward_path;
        ctx.target = setup.rect_to;
        ctx.side_sys = &cert.b.sys;
        ctx.side_lo = cert.b.e1;
        ctx.side_hi = cert.b.e2;
        ctx.window_mid = region_window_mid(cert, setup.rect_from->region);
        ctx.mem_tol = mem_tol;
        ctx.cfg = &cfg;
        out.forward = scan_phase(ctx, rect_from, rect_to, 5.0 * kPi, 2, n_path);
    }
    {
        ScanContext ctx;
        ctx.cert = &cert;
        ctx.leg = &setup.legs[1];
        ctx.path = &setup.backward_path;
        ctx.target = setup.rect_from;
        ctx.side_sys = &cert.a.sys;
        ctx.side_lo = cert.a.e1;
        ctx.side_hi = cert.a.e2;
        ctx.window_mid = region_window_mid(cert, setup.rect_to->region);
        ctx.mem_tol = mem_tol;
        ctx.cfg = &cfg;
        out.backward = scan_phase(ctx, rect_to, rect_from, 3.0 * kPi, 1, n_path);
    }
    return out;
}

}  // namespace

Vec2 poincare(const SwitchSchedule& sched, Vec2 x0, const ode::IntegratorConfig& cfg) {
    const auto legs = build_legs(sched, Perturbation{});
    return full_period_map(legs, x0, cfg);
}

StretchCertificate verify_stretch(const SwitchSchedule& sched, const LinkCertificate& cert,
                                  int rect_from, int rect_to, int n_path,
                                  const ode::IntegratorConfig& cfg) {
    return verify_impl(sched, cert, rect_from, rect_to, n_path, Perturbation{}, cfg);
}

StretchCertificate verify_stretch_perturbed(const SwitchSchedule& sched,
                                            const LinkCertificate& cert, int rect_from,
                                            int rect_to, int n_path,
                                            const Perturbation& pert,
                                            const ode::IntegratorConfig& cfg) {
    return verify_impl(sched, cert, rect_from, rect_to, n_path, pert, cfg);
}

StretchCertificate perturb_and_recheck(const SwitchSchedule& sched,
                                       const LinkCertificate& cert, int rect_from,
                                       int rect_to, double eps, PerturbShape shape,
                                       int n_path, const ode::IntegratorConfig& cfg) {
    if (eps < 0.0) throw ValidationError("perturbation budget must be non-negative");
    const StretchCertificate base =
        verify_impl(sched, cert, rect_from, rect_to, n_path, Perturbation{}, cfg);
    if (!base.pass())
        throw CertificateError(
            "perturb_and_recheck requires the unperturbed stretch certificate to pass");

    Perturbation pert;
    pert.shape = shape;
    const double T = sched.period();
    // amplitude chosen so each coefficient's L1 distance over [0,T] is 0.999*eps
    pert.amplitude = shape == PerturbShape::SquareWave ? 0.999 * eps / T
                                                       : 0.999 * eps * kPi / (2.0 * T);
    return verify_impl(sched, cert, rect_from, rect_to, n_path, pert, cfg);
}

bool bitwise_equal(const StretchCertificate& a, const StretchCertificate& b) {
    const auto phase_eq = [](const PhaseStretch& x, const PhaseStretch& y) {
        if (x.source_rect != y.source_rect || x.target_rect != y.target_rect) return false;
        if (std::memcmp(&x.span, &y.span, sizeof(double)) != 0) return false;
        if (x.span_required != y.span_required ||
            x.required_crossings != y.required_crossings)
            return false;
        if (x.crossings.size() != y.crossings.size() || x.trace.size() != y.trace.size())
            return false;
        for (size_t i = 0; i < x.crossings.size(); ++i) {
            if (std::memcmp(&x.crossings[i].lam_lo, &y.crossings[i].lam_lo, sizeof(double)) ||
                std::memcmp(&x.crossings[i].lam_hi, &y.crossings[i].lam_hi, sizeof(double)) ||
                x.crossings[i].side_lo != y.crossings[i].side_lo ||
                x.crossings[i].side_hi != y.crossings[i].side_hi)
                return false;
        }
        for (size_t i = 0; i < x.trace.size(); ++i) {
            if (std::memcmp(&x.trace[i].lam, &y.trace[i].lam, sizeof(double)) ||
                std::memcmp(&x.trace[i].phi, &y.trace[i].phi, sizeof(double)) ||
                x.trace[i].in_target != y.trace[i].in_target)
                return false;
        }
        return true;
    };
    return a.T1 == b.T1 && a.T2 == b.T2 && a.n_path == b.n_path &&
           phase_eq(a.forward, b.forward) && phase_eq(a.backward, b.backward);
}

std::vector<std::pair<int, int>> default_rect_pairs(const LinkCertificate& cert) {
    if (cert.kind == LinkKind::TwoCenters) return {{0, 1}, {1, 0}};
    return {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
}

ItineraryResult itinerary_demo(const SwitchSchedule& sched, const LinkCertificate& cert,
                               const std::vector<int>& symbols, int n_path,
                               const ode::IntegratorConfig& cfg) {
    if (symbols.empty() || symbols.size() > 6)
        throw ValidationError("itinerary depth must be between 1 and 6");
    for (int s : symbols)
        if (s < 0 || s >= static_cast<int>(cert.rectangles.size()))
            throw ValidationError("itinerary symbol out of range");

    // precondition: the stretch certificate holds for every consecutive pair
    std::vector<std::pair<int, int>> pairs;
    for (size_t k = 0; k + 1 < symbols.size(); ++k) {
        const std::pair<int, int> pr{symbols[k], symbols[k + 1]};
        if (std::find(pairs.begin(), pairs.end(), pr) == pairs.end()) pairs.push_back(pr);
    }
    for (const auto& [s, t] : pairs) {
        const StretchCertificate sc =
            verify_stretch(sched, cert, s, t, std::max(n_path, 256), cfg);
        if (!sc.pass()) {
            std::ostringstream os;
            os << "itinerary precondition failed: stretch certificate for pair (" << s
               << " -> " << t << ") does not pass";
            throw ValidationError(os.str());
        }
    }

    const auto legs = build_legs(sched, Perturbation{});
    const double mem_tol =
        1e-9 * std::max({1.0, std::abs(cert.a.e2), std::abs(cert.b.e2)});

    RectPath path(cert, StretchSetup::rect(cert, symbols[0]), 0);
    double lam_a = 0.0, lam_b = 1.0;

    for (size_t k = 0; k + 1 < symbols.size(); ++k) {
        const OrientedRectangle& next = StretchSetup::rect(cert, symbols[k + 1]);

        for (int half = 0; half < 2; ++half) {
            ScanContext ctx;
            ctx.cert = &cert;
            ctx.leg = &legs[half];
            ctx.path = &path;
            ctx.target = &next;
            ctx.side_sys = half == 0 ? &cert.b.sys : &cert.a.sys;
            ctx.side_lo = half == 0 ? cert.b.e1 : cert.a.e1;
            ctx.side_hi = half == 0 ? cert.b.e2 : cert.a.e2;
            // half 0 starts in the current rectangle, half 1 in the one the
            // phase-1 image just crossed into
            ctx.window_mid = region_window_mid(
                cert, half == 0 ? StretchSetup::rect(cert, symbols[k]).region : next.region);
            ctx.mem_tol = mem_tol;
            ctx.cfg = &cfg;

            const auto window = target_window(ctx);
            // half 0: k full periods then phase 1, crossings between the
            // second system's sides; half 1: k periods + phase 1 already
            // behind, scan phase 2 into the first system's sides.
            struct HalfEval {
                const ScanContext* ctx;
                const std::array<Leg, 2>* legs;
                int half;
                int periods;
                const ode::IntegratorConfig* cfg;
                ScanSample operator()(double lam) const {
                    ScanSample s;
                    s.lam = lam;
                    Vec2 x = ctx->path->at(lam);
                    for (int p = 0; p < periods; ++p) x = full_period_map(*legs, x, *cfg);
                    if (half == 1) x = leg_endpoint((*legs)[0], x, *cfg);
                    const LegAngleResult r = leg_flow_angle(*ctx->leg, x, *cfg);
                    s.y = r.y;
                    const double theta0n = unwrap_near(r.theta0, ctx->window_mid);
                    s.phi = ctx->leg->rot_sign * (theta0n + r.dtheta);
                    s.h_side = models::inside_domain(*ctx->side_sys, r.y, 1e-12)
                                   ? models::hamiltonian(*ctx->side_sys, r.y)
                                   : 1e300;
                    s.inside = annuli::rect_contains(*ctx->cert, *ctx->target, r.y,
                                                     ctx->mem_tol);
                    return s;
                }
            };
            HalfEval he{&ctx, &legs, half, static_cast<int>(k), &cfg};

            const int n_base = std::max(65, n_path / 4);
            std::vector<ScanSample> samples(n_base);
            parallel_for(n_base, [&](size_t i) {
                const double lam =
                    lam_a + (lam_b - lam_a) * static_cast<double>(i) / (n_base - 1);
                samples[i] = he(lam);
            });
            const double win_width = window.second - window.first;
            const double fine_cap = std::max(win_width / 10.0, 1e-4);
            for (int round = 0; round < 64; ++round) {
                std::vector<double> mids;
                for (size_t i = 0; i + 1 < samples.size(); ++i) {
                    const auto& a = samples[i];
                    const auto& b = samples[i + 1];
                    const double dl = b.lam - a.lam;
                    if (dl <= 1e-14 * std::max(1.0, std::abs(a.lam))) continue;
                    const double dphi = std::abs(b.phi - a.phi);
                    bool split = dphi > kMinSpanRefine;
                    if (!split && a.inside != b.inside && dl > 1e-12) split = true;
                    if (!split && dphi > fine_cap && near_window(a.phi, b.phi, window))
                        split = true;
                    if (split) mids.push_back(0.5 * (a.lam + b.lam));
                }
                if (mids.empty() || samples.size() + mids.size() > 100000) break;
                std::vector<ScanSample> extra(mids.size());
                parallel_for(mids.size(), [&](size_t i) { extra[i] = he(mids[i]); });
                samples.insert(samples.end(), extra.begin(), extra.end());
                std::sort(samples.begin(), samples.end(),
                          [](const ScanSample& x, const ScanSample& y) {
                              return x.lam < y.lam;
                          });
            }

            // first maximal inside-run whose image hits both designated sides
            bool found = false;
            size_t i = 0;
            while (i < samples.size() && !found) {
                if (!samples[i].inside) {
                    ++i;
                    continue;
                }
                size_t j = i;
                while (j + 1 < samples.size() && samples[j + 1].inside) ++j;
                if (i > 0 && j + 1 < samples.size()) {
                    const double h_in_lo = samples[i - 1].h_side;
                    const double h_in_hi = samples[j + 1].h_side;
                    const bool lo_inner = h_in_lo < ctx.side_lo;
                    const bool lo_outer = h_in_lo > ctx.side_hi;
                    const bool hi_inner = h_in_hi < ctx.side_lo;
                    const bool hi_outer = h_in_hi > ctx.side_hi;
                    if ((lo_inner && hi_outer) || (lo_outer && hi_inner)) {
                        lam_a = samples[i].lam;
                        lam_b = samples[j].lam;
                        found = true;
                    }
                }
                i = j + 1;
            }
            if (!found) {
                if (lam_b - lam_a < 1e-14)
                    throw DepthExceededError(
                        "itinerary refinement stalled below parameter width 1e-14");
                throw NumericError("itinerary refinement found no complete crossing");
            }
            if (lam_b - lam_a < 1e-14)
                throw DepthExceededError(
                    "itinerary refinement stalled below parameter width 1e-14");
        }
    }

    ItineraryResult res;
    res.symbols = symbols;
    res.x0 = path.at(0.5 * (lam_a + lam_b));

    // verify by direct integration
    res.verified = true;
    Vec2 x = res.x0;
    for (size_t k = 0; k < symbols.size(); ++k) {
        res.iterates.push_back(x);
        const OrientedRectangle& rect = StretchSetup::rect(cert, symbols[k]);
        if (!annuli::rect_contains(cert, rect, x, 1e-8)) res.verified = false;
        if (k + 1 < symbols.size()) x = full_period_map(legs, x, cfg);
    }
    return res;
}

}  // namespace ltm::twist
