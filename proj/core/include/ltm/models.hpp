#pragma once

#include <string>
#include <variant>

#include "ltm/errors.hpp"
#include "ltm/geometry.hpp"

namespace ltm::models {

enum class Variant { NegMed, PosMed, Bio };
enum class Rotation { Clockwise, CounterClockwise };

std::string to_string(Variant v);

// ---------------------------------------------------------------------------
// Raw parameters of the two game formulations.
// ---------------------------------------------------------------------------

/// Negative defensive medicine: physicians may pick a safer but inferior
/// treatment; patients decide whether to litigate.
struct RawGameParamsNeg {
    double p_D;    // probability the court condemns after the safe treatment
    double p_ND;   // probability the court condemns after the risky treatment
    double q_D;    // harm probability under the safe treatment
    double q_ND;   // harm probability under the risky treatment
    double B_PH;   // physician's immediate benefit of the safe treatment
    double E;      // compensation paid when the physician loses
    double C_L;    // patient's cost of suing
};

/// Positive defensive medicine: physicians may add unnecessary procedures;
/// patients decide whether to litigate after an adverse event.
struct RawGameParamsPos {
    double p;      // probability of an adverse event
    double q_D;    // probability the patient wins after defensive practice
    double q_ND;   // probability the patient wins otherwise
    double R;      // damage / compensation on a patient win
    double K;      // reparation paid by the patient on a loss
    double C_D;    // physician's cost of practicing defensively
    double C_ND;   // physician's cost otherwise
    double C_L;    // patient's cost of suing
};

// ---------------------------------------------------------------------------
// Canonical coefficients. Each set describes one planar system with a first
// integral H and a center equilibrium, on an open rectangular domain.
// ---------------------------------------------------------------------------

/// d' = d(1-d)(zeta - eta*l),  l' = l(1-l)(-theta + kappa*d)  on (0,1)^2.
/// Center regime: 0 < zeta < eta, 0 < theta < kappa. Run counterclockwise.
struct ParamsNeg {
    double zeta;
    double eta;
    double theta;
    double kappa;
};

/// d' = d(1-d)(p*lambda*l - mu),  l' = l(1-l)*p*(nu - lambda*d)  on (0,1)^2.
/// Center regime: 0 < mu < p*lambda, 0 < nu < lambda. Run clockwise.
struct ParamsPos {
    double p;
    double lambda;
    double mu;
    double nu;
};

/// x' = r_x x (1 - x/K_x)(alpha - beta y),
/// y' = r_y y (1 - y/K_y)(-gamma + delta x)  on (0,K_x) x (0,K_y).
/// Center regime: 0 < alpha < beta, 0 < gamma < delta. Run counterclockwise.
/// r and K are kept explicit; the switching schedules toggle exactly them.
struct ParamsBio {
    double alpha;
    double beta;
    double gamma;
    double delta;
    double r_x;
    double r_y;
    double K_x;
    double K_y;
};

ParamsNeg derive_neg(const RawGameParamsNeg& raw);
ParamsPos derive_pos(const RawGameParamsPos& raw);

void validate(const ParamsNeg& p);
void validate(const ParamsPos& p);
void validate(const ParamsBio& p);

// ---------------------------------------------------------------------------
// SystemSpec: one concrete system instance.
// ---------------------------------------------------------------------------

struct SystemSpec {
    std::variant<ParamsNeg, ParamsPos, ParamsBio> params;
    Vec2 domain;  // open rectangle (0, domain.x) x (0, domain.y)

    Variant variant() const {
        switch (params.index()) {
            case 0: return Variant::NegMed;
            case 1: return Variant::PosMed;
            default: return Variant::Bio;
        }
    }
    const ParamsNeg& neg() const { return std::get<ParamsNeg>(params); }
    const ParamsPos& pos() const { return std::get<ParamsPos>(params); }
    const ParamsBio& bio() const { return std::get<ParamsBio>(params); }
};

/// Validate parameters and build the system (domain derived from variant).
SystemSpec make_system(const ParamsNeg& p);
SystemSpec make_system(const ParamsPos& p);
SystemSpec make_system(const ParamsBio& p);

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

inline Vec2 rhs(const ParamsNeg& c, Vec2 z) {
    return {z.x * (1.0 - z.x) * (c.zeta - c.eta * z.y),
            z.y * (1.0 - z.y) * (-c.theta + c.kappa * z.x)};
}

inline Vec2 rhs(const ParamsPos& c, Vec2 z) {
    return {z.x * (1.0 - z.x) * (c.p * c.lambda * z.y - c.mu),
            z.y * (1.0 - z.y) * c.p * (c.nu - c.lambda * z.x)};
}

inline Vec2 rhs(const ParamsBio& c, Vec2 z) {
    return {c.r_x * z.x * (1.0 - z.x / c.K_x) * (c.alpha - c.beta * z.y),
            c.r_y * z.y * (1.0 - z.y / c.K_y) * (-c.gamma + c.delta * z.x)};
}

Vec2 center(const SystemSpec& sys);
Vec2 vector_field(const SystemSpec& sys, Vec2 x);

/// First integral. Throws DomainError within 1e-12 of the domain boundary.
double hamiltonian(const SystemSpec& sys, Vec2 x);
Vec2 hamiltonian_gradient(const SystemSpec& sys, Vec2 x);

/// Minimum energy e0 = H(center).
double min_energy(const SystemSpec& sys);

Rotation rotation_direction(const SystemSpec& sys);

/// sqrt(|det J|) at the center; 2*pi/omega is the small-orbit period limit.
double linearized_frequency(const SystemSpec& sys);

bool inside_domain(const SystemSpec& sys, Vec2 x, double margin = 0.0);

}  // namespace ltm::models
