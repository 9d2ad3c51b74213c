#pragma once

#include <utility>
#include <vector>

#include "ltm/annuli.hpp"
#include "ltm/models.hpp"
#include "ltm/ode.hpp"

namespace ltm::twist {

/// T-periodic alternation between two regimes of the same model variant.
/// Phase 1 runs sys1 on [0, T1), phase 2 runs sys2 on [T1, T1+T2).
struct SwitchSchedule {
    models::SystemSpec sys1, sys2;
    double T1 = 0.0;
    double T2 = 0.0;

    double period() const { return T1 + T2; }
};

/// Validates durations and that the two regimes differ in exactly the
/// parameter(s) the variant is allowed to switch.
SwitchSchedule make_schedule(const models::SystemSpec& sys1,
                             const models::SystemSpec& sys2, double T1, double T2);

struct ThresholdReport {
    double c1 = 0.0, c2 = 0.0;    // bound constants per phase
    double tau1a = 0.0, tau1b = 0.0, tau2a = 0.0, tau2b = 0.0;
    double T1_min = 0.0, T2_min = 0.0;
};

/// Minimal switching durations: T_min = c * tau_a * tau_b / (2 (tau_b - tau_a)).
/// Game variants use constants (11, 9); bio uses (9, 7).
ThresholdReport thresholds(double tau1a, double tau1b, double tau2a, double tau2b,
                           models::Variant variant);

/// Full-period return map: phase-2 flow after phase-1 flow.
Vec2 poincare(const SwitchSchedule& sched, Vec2 x0,
              const ode::IntegratorConfig& cfg = {});

enum class PerturbShape { SquareWave, SmoothBump };

/// Time-varying disturbance added to every switched coefficient.
struct Perturbation {
    double amplitude = 0.0;
    PerturbShape shape = PerturbShape::SquareWave;
    int cycles = 8;  // waveform cycles per switching period
};

struct CrossingInterval {
    double lam_lo = 0.0, lam_hi = 0.0;
    int side_lo = -1, side_hi = -1;  // 0: inner level, 1: outer level, -1: not a side
    bool complete() const {
        return side_lo >= 0 && side_hi >= 0 && side_lo != side_hi;
    }
};

struct TraceSample {
    double lam = 0.0;
    double phi = 0.0;  // signed unwrapped angle of the image
    bool in_target = false;
};

/// One stretching condition: the image of a path joining the source
/// rectangle's designated sides, its angular span, and its complete
/// traversals of the target rectangle.
struct PhaseStretch {
    int source_rect = 0, target_rect = 0;
    double span = 0.0;
    double span_required = 0.0;
    int required_crossings = 1;
    std::vector<CrossingInterval> crossings;  // complete traversals, by lambda
    std::vector<TraceSample> trace;
    int complete_crossings() const { return static_cast<int>(crossings.size()); }
    bool span_ok() const { return span > span_required; }
    bool crossings_ok() const { return complete_crossings() >= required_crossings; }
    bool pass() const { return span_ok() && crossings_ok(); }
};

struct StretchCertificate {
    double T1 = 0.0, T2 = 0.0;
    int n_path = 0;
    PhaseStretch forward;   // phase-1 map, rect_from -> rect_to, needs 2 crossings / 5 pi
    PhaseStretch backward;  // phase-2 map, rect_to -> rect_from, needs 1 crossing / 3 pi
    bool pass() const { return forward.pass() && backward.pass(); }
};

bool bitwise_equal(const StretchCertificate& a, const StretchCertificate& b);

/// Verifies both stretching conditions for the ordered rectangle pair.
/// The path across the source joins its two first-system energy sides for
/// the forward phase and second-system sides for the backward phase;
/// crossings are maximal parameter intervals whose image lies in the target
/// with endpoint images on the target's two designated sides (1e-8 energy
/// tolerance). n_path >= 256.
StretchCertificate verify_stretch(const SwitchSchedule& sched,
                                  const annuli::LinkCertificate& cert, int rect_from,
                                  int rect_to, int n_path,
                                  const ode::IntegratorConfig& cfg = {});

/// verify_stretch against coefficients jittered in time by `pert`.
StretchCertificate verify_stretch_perturbed(const SwitchSchedule& sched,
                                            const annuli::LinkCertificate& cert,
                                            int rect_from, int rect_to, int n_path,
                                            const Perturbation& pert,
                                            const ode::IntegratorConfig& cfg = {});

/// Requires the unperturbed certificate to pass, then re-verifies with every
/// switched coefficient perturbed within an L1 budget of eps over one period.
StretchCertificate perturb_and_recheck(const SwitchSchedule& sched,
                                       const annuli::LinkCertificate& cert,
                                       int rect_from, int rect_to, double eps,
                                       PerturbShape shape, int n_path,
                                       const ode::IntegratorConfig& cfg = {});

struct ItineraryResult {
    Vec2 x0;
    std::vector<int> symbols;
    std::vector<Vec2> iterates;  // iterates[k] = k-th return-map image of x0
    bool verified = false;
};

/// Finds a start point whose successive full-period images visit the given
/// rectangles, by nested refinement of crossing intervals; each membership is
/// re-checked by direct integration. symbols.size() <= 6.
ItineraryResult itinerary_demo(const SwitchSchedule& sched,
                               const annuli::LinkCertificate& cert,
                               const std::vector<int>& symbols, int n_path,
                               const ode::IntegratorConfig& cfg = {});

/// Source/target pairs the chaos argument runs on: (A,B) for two-center
/// links; the cyclic quadrant pairs for one-center links.
std::vector<std::pair<int, int>> default_rect_pairs(const annuli::LinkCertificate& cert);

}  // namespace ltm::twist
